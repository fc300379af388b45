#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "augablate/nn/checkpoint.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace augb {

namespace {

constexpr char kMagic[4] = {'A', 'U', 'G', 'B'};

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& is, const std::string& what) {
  std::uint32_t v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("checkpoint: truncated reading " + what);
  return v;
}

std::uint64_t read_u64(std::istream& is, const std::string& what) {
  std::uint64_t v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("checkpoint: truncated reading " + what);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor<float>*>>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, 4);
  write_u32(os, kCheckpointVersion);
  write_u32(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<std::uint32_t>(t->rank()));
    for (Index i = 0; i < t->rank(); ++i)
      write_u64(os, static_cast<std::uint64_t>(t->dim(i)));
    os.write(reinterpret_cast<const char*>(t->data()),
             static_cast<std::streamsize>(sizeof(float) * t->size()));
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

std::map<std::string, Tensor<float>> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": not a checkpoint (bad magic)");
  const std::uint32_t version = read_u32(is, "version");
  if (version != kCheckpointVersion)
    throw std::runtime_error(path + ": unsupported checkpoint version " +
                             std::to_string(version));
  const std::uint32_t count = read_u32(is, "tensor count");

  std::map<std::string, Tensor<float>> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(is, "name length");
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len))
      throw std::runtime_error(path + ": truncated tensor name");
    const std::uint32_t rank = read_u32(is, "rank");
    Shape shape(rank);
    for (std::uint32_t d = 0; d < rank; ++d)
      shape[d] = static_cast<Index>(read_u64(is, "extent"));
    Tensor<float> t(shape);
    if (!is.read(reinterpret_cast<char*>(t.data()),
                 static_cast<std::streamsize>(sizeof(float) * t.size())))
      throw std::runtime_error(path + ": truncated payload for '" + name + "'");
    if (!out.emplace(std::move(name), std::move(t)).second)
      throw std::runtime_error(path + ": duplicate tensor name");
  }
  return out;
}

}  // namespace augb
