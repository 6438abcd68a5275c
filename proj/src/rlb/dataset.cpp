#include "stca/rlb/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace stca::rlb {

namespace {

using nlohmann::json;

json event_json(const HistoryEvent& e) {
  return {{"video_id", e.video_id}, {"action_type", e.action_type}, {"timestamp", e.timestamp}};
}

History parse_history(const json& j) {
  History h;
  for (const auto& e : j) {
    HistoryEvent ev;
    ev.video_id = e.at("video_id").get<Id>();
    ev.action_type = e.value("action_type", Id{0});
    ev.timestamp = e.at("timestamp").get<Seconds>();
    ev.position = static_cast<std::int64_t>(h.size());
    h.push_back(ev);
  }
  return h;
}

json target_json(const TargetItem& t) {
  json j = {{"video_id", t.video_id}, {"request_time", t.request_time}};
  if (!t.aux.empty()) j["aux"] = t.aux;
  return j;
}

TargetItem parse_target(const json& j) {
  TargetItem t;
  t.video_id = j.at("video_id").get<Id>();
  t.request_time = j.at("request_time").get<Seconds>();
  if (j.contains("aux")) t.aux = j.at("aux").get<std::vector<float>>();
  return t;
}

template <typename F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

void to_json(json& j, const Request& r) {
  j = json::object();
  j["user_id"] = r.user_id;
  if (r.session_id != 0) j["session_id"] = r.session_id;
  j["history"] = json::array();
  for (const auto& e : r.history) j["history"].push_back(event_json(e));
  j["targets"] = json::array();
  for (const auto& t : r.targets) j["targets"].push_back(target_json(t));
  j["labels"] = r.labels;
  if (!r.user_tokens.empty()) j["user_tokens"] = r.user_tokens;
}

void from_json(const json& j, Request& r) {
  r.user_id = j.at("user_id").get<Id>();
  r.session_id = j.value("session_id", Id{0});
  r.history = parse_history(j.at("history"));
  r.targets.clear();
  for (const auto& t : j.at("targets")) r.targets.push_back(parse_target(t));
  r.labels = j.at("labels").get<std::vector<int>>();
  r.user_tokens = j.value("user_tokens", std::vector<float>{});
}

void write_requests(std::ostream& out, std::span<const Request> requests) {
  for (const auto& r : requests) out << json(r).dump() << '\n';
  if (!out) throw FormatError("failed writing requests");
}

std::vector<Request> read_requests(std::istream& in) {
  std::vector<Request> out;
  for_each_line(in, [&](const json& j) {
    auto r = j.get<Request>();
    r.validate();
    out.push_back(std::move(r));
  });
  return out;
}

void save_requests(const std::filesystem::path& path, std::span<const Request> requests) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_requests(out, requests);
}

std::vector<Request> load_requests(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_requests(in);
}

std::vector<Triplet> read_triplets(std::istream& in) {
  std::vector<Triplet> out;
  for_each_line(in, [&](const json& j) {
    Triplet t;
    t.user_id = j.at("user_id").get<Id>();
    t.session_id = j.value("session_id", Id{0});
    t.history = parse_history(j.at("history"));
    t.target = parse_target(j.at("target"));
    t.label = j.at("label").get<int>();
    t.user_tokens = j.value("user_tokens", std::vector<float>{});
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<Request> convert_triplets(std::istream& in, GroupKey key) {
  const auto triplets = read_triplets(in);
  return group_by_request(triplets, key);
}

}  // namespace stca::rlb
