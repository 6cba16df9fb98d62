#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fednids/model.hpp"

namespace fednids {
namespace {

constexpr char kMagic[8] = {'F', 'N', 'I', 'D', 'S', 'C', 'K', '1'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t& offset) {
  if (offset + sizeof(T) > in.size()) throw ModelError("checkpoint truncated");
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  offset += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

std::vector<std::uint8_t> serialize_parameters(const ModelParameters& params) {
  std::vector<std::uint8_t> out;
  out.reserve(sizeof kMagic + 4 + 8 * params.layers.size() + 8 * params.parameter_count());
  for (const char c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_le(out, static_cast<std::uint32_t>(params.layers.size()));
  for (const auto& l : params.layers) {
    put_le(out, static_cast<std::uint32_t>(l.fan_in()));
    put_le(out, static_cast<std::uint32_t>(l.fan_out()));
  }
  for (const double v : params.flatten()) put_le(out, v);
  return out;
}

ModelParameters deserialize_parameters(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ModelError("not a fednids checkpoint (bad magic)");
  }
  std::size_t offset = sizeof kMagic;
  const auto n_layers = get_le<std::uint32_t>(bytes, offset);
  if (n_layers > 1024) throw ModelError("checkpoint: implausible layer count");
  ModelParameters p;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto fan_in = get_le<std::uint32_t>(bytes, offset);
    const auto fan_out = get_le<std::uint32_t>(bytes, offset);
    p.layers.push_back({Eigen::MatrixXd::Zero(fan_in, fan_out), Eigen::VectorXd::Zero(fan_out)});
  }
  const auto count = p.parameter_count();
  if (bytes.size() - offset != count * sizeof(double)) {
    throw ModelError("checkpoint: payload holds " + std::to_string(bytes.size() - offset) +
                     " bytes, header implies " + std::to_string(count * sizeof(double)));
  }
  std::vector<double> values(count);
  for (auto& v : values) v = get_le<double>(bytes, offset);
  p.assign_flat(values);
  return p;
}

void save_checkpoint(const ModelParameters& params, const std::filesystem::path& path) {
  const auto bytes = serialize_parameters(params);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ModelError("cannot write checkpoint '" + path.string() + "'");
}

ModelParameters load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return deserialize_parameters(bytes);
}

}  // namespace fednids
