#include "stca/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "stca/errors.hpp"

namespace stca::model {

namespace {

constexpr char kMagic[] = {'S', 'T', 'C', 'A', '1'};

template <typename U>
void put(std::ostream& out, U value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  out.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

template <typename U>
U get(std::istream& in, const char* what) {
  U value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(U));
  if (!in) throw FormatError(std::string("checkpoint truncated while reading ") + what);
  return value;
}

std::string get_bytes(std::istream& in, std::size_t n, const char* what) {
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw FormatError(std::string("checkpoint truncated while reading ") + what);
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const StcaConfig& config, const StcaParams<float>& params) {
  params.check(config);
  out.write(kMagic, sizeof(kMagic));
  const std::string json = nlohmann::json(config).dump();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(json.size()));
  out.write(json.data(), static_cast<std::streamsize>(json.size()));
  for (const auto* p : params.all()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint32_t>(out, 2);
    put<std::uint64_t>(out, p->value.rows());
    put<std::uint64_t>(out, p->value.cols());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  }
  if (!out) throw FormatError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw FormatError("bad checkpoint magic");
  const auto json_len = get<std::uint32_t>(in, "config length");
  Checkpoint ck;
  try {
    ck.config = nlohmann::json::parse(get_bytes(in, json_len, "config")).get<StcaConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  ck.config.validate();
  ck.params = StcaParams<float>::initialize(ck.config, 0);

  std::map<std::string, Param<float>*> by_name;
  for (auto* p : ck.params.all()) by_name[p->name] = p;
  std::map<std::string, bool> seen;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto name_len = get<std::uint32_t>(in, "tensor name length");
    const std::string name = get_bytes(in, name_len, "tensor name");
    const auto rank = get<std::uint32_t>(in, "tensor rank");
    if (rank == 0 || rank > 2) throw FormatError("tensor '" + name + "' has unsupported rank " + std::to_string(rank));
    std::uint64_t dims[2] = {1, 1};
    for (std::uint32_t r = 0; r < rank; ++r) dims[2 - rank + r] = get<std::uint64_t>(in, "tensor dims");
    auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("unknown tensor '" + name + "'");
    auto& value = it->second->value;
    if (dims[0] != value.rows() || dims[1] != value.cols()) {
      throw FormatError("tensor '" + name + "' has shape " + numerics::shape_string(dims[0], dims[1]) +
                        ", config expects " + value.shape());
    }
    in.read(reinterpret_cast<char*>(value.data()), static_cast<std::streamsize>(value.size() * sizeof(float)));
    if (!in) throw FormatError("checkpoint truncated in tensor '" + name + "'");
    seen[name] = true;
  }
  for (const auto& [name, p] : by_name) {
    if (!seen.count(name)) throw FormatError("checkpoint is missing tensor '" + name + "'");
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const StcaConfig& config,
                     const StcaParams<float>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, config, params);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace stca::model
