#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "stca/rlb/rlb.hpp"

namespace stca::rlb {

void to_json(nlohmann::json& j, const Request& r);
void from_json(const nlohmann::json& j, Request& r);

// One Request per line.
void write_requests(std::ostream& out, std::span<const Request> requests);
std::vector<Request> read_requests(std::istream& in);
void save_requests(const std::filesystem::path& path, std::span<const Request> requests);
std::vector<Request> load_requests(const std::filesystem::path& path);

// Flat triplet lines: {user_id, [session_id], history, target, label}.
std::vector<Triplet> read_triplets(std::istream& in);
std::vector<Request> convert_triplets(std::istream& in, GroupKey key = GroupKey::kUser);

}  // namespace stca::rlb
