#include "relex/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace relex {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written little-endian");

static constexpr char kMagic[8] = {'R', 'E', 'L', 'E', 'X', 'C', 'K', '1'};

namespace {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error(std::string("checkpoint truncated while reading ") + what);
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const HyperParams& hyper, const Vocab& vocab,
                     double threshold, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);

  nlohmann::json header;
  header["format_version"] = 1;
  header["hyper"] = nlohmann::json::parse(hyper.to_json_string());
  header["vocab"] = nlohmann::json::parse(vocab.to_json_string());
  header["threshold"] = threshold;
  const std::string header_text = header.dump();

  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint64_t>(out, header_text.size());
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

  const auto named = params.named();
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const auto& shape = tensor.shape();
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (int d : shape) write_pod<std::int32_t>(out, d);
    out.write(reinterpret_cast<const char*>(tensor.data().data()),
              static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failure on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path, const HyperParams* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file (bad magic): " + path);

  const auto header_len = read_pod<std::uint64_t>(in, "header length");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("checkpoint truncated in header: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("corrupt checkpoint header: ") + e.what());
  }
  if (header.value("format_version", -1) != 1)
    throw std::runtime_error("unsupported checkpoint version " +
                             header.value("format_version", nlohmann::json()).dump());

  Checkpoint ck;
  ck.hyper = HyperParams::from_json_string(header.at("hyper").dump());
  ck.vocab = Vocab::from_json_string(header.at("vocab").dump());
  ck.threshold = header.at("threshold").get<double>();

  if (expected) {
    auto require = [](int stored, int exp, const char* name) {
      if (stored != exp)
        throw std::runtime_error(std::string("checkpoint ") + name + " is " +
                                 std::to_string(stored) + " but configuration expects " +
                                 std::to_string(exp));
    };
    require(ck.hyper.d_w, expected->d_w, "d_w");
    require(ck.hyper.d_z, expected->d_z, "d_z");
    require(ck.hyper.d_u, expected->d_u, "d_u");
    require(ck.hyper.f_g, expected->f_g, "f_g");
    require(ck.hyper.f_e, expected->f_e, "f_e");
    require(ck.hyper.k, expected->k, "k");
    require(ck.hyper.m, expected->m, "m");
    require(ck.hyper.max_pos, expected->max_pos, "max_pos");
  }

  // allocate the architecture, then overwrite every block in stored order
  Rng scratch(0);
  ck.params = init_params(ck.hyper, ck.vocab, scratch);
  auto named = ck.params.named();

  const auto count = read_pod<std::uint32_t>(in, "block count");
  if (count != named.size())
    throw std::runtime_error("checkpoint holds " + std::to_string(count) + " parameters, model has " +
                             std::to_string(named.size()));
  for (std::uint32_t b = 0; b < count; ++b) {
    const auto name_len = read_pod<std::uint32_t>(in, "name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw std::runtime_error("checkpoint truncated in parameter name");
    if (name != named[b].first)
      throw std::runtime_error("checkpoint parameter '" + name + "' does not match expected '" +
                               named[b].first + "'");
    const auto ndim = read_pod<std::uint32_t>(in, "rank");
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = read_pod<std::int32_t>(in, "dimension");
    if (shape != named[b].second.shape())
      throw std::runtime_error("checkpoint parameter '" + name + "' has shape " +
                               ad::shape_str(shape) + ", model expects " +
                               ad::shape_str(named[b].second.shape()));
    in.read(reinterpret_cast<char*>(named[b].second.data().data()),
            static_cast<std::streamsize>(named[b].second.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint truncated in parameter '" + name + "'");
  }
  return ck;
}

}  // namespace relex
