#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "augablate/data/cifar.hpp"

namespace augb {

Dataset load_cifar(const std::vector<std::string>& files, int classes) {
  if (classes != 10 && classes != 100)
    throw std::invalid_argument("load_cifar: classes must be 10 or 100");
  const std::size_t rec = cifar_record_bytes(classes);

  Dataset out;
  out.classes = classes;
  std::vector<char> buf(rec);
  for (const std::string& path : files) {
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) throw std::runtime_error("cannot open " + path);
    const auto bytes = static_cast<std::size_t>(is.tellg());
    if (bytes == 0 || bytes % rec != 0)
      throw std::runtime_error(path + ": size " + std::to_string(bytes) +
                               " is not a multiple of the " + std::to_string(rec) +
                               "-byte record");
    is.seekg(0);
    const std::size_t n = bytes / rec;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is.read(buf.data(), static_cast<std::streamsize>(rec)))
        throw std::runtime_error(path + ": short read at record " + std::to_string(i));
      const auto* b = reinterpret_cast<const unsigned char*>(buf.data());
      // 100-class records carry (coarse, fine); the fine label is the target.
      const int label = classes == 100 ? b[1] : b[0];
      if (label >= classes)
        throw std::runtime_error(path + ": label " + std::to_string(label) +
                                 " out of range at record " + std::to_string(i));
      const unsigned char* px = b + (classes == 100 ? 2 : 1);
      Image img(32, 32, 3);
      for (int c = 0; c < 3; ++c)  // planar to interleaved
        for (int y = 0; y < 32; ++y)
          for (int x = 0; x < 32; ++x)
            img.at(y, x, c) = static_cast<float>(px[(c * 32 + y) * 32 + x]) / 255.0f;
      out.push(std::move(img), label);
    }
  }
  return out;
}

std::vector<std::string> cifar10_train_files(const std::string& dir) {
  std::vector<std::string> files;
  for (int i = 1; i <= 5; ++i)
    files.push_back(dir + "/data_batch_" + std::to_string(i) + ".bin");
  return files;
}

std::vector<std::string> cifar10_test_files(const std::string& dir) {
  return {dir + "/test_batch.bin"};
}

std::vector<std::string> cifar100_train_files(const std::string& dir) {
  return {dir + "/train.bin"};
}

std::vector<std::string> cifar100_test_files(const std::string& dir) {
  return {dir + "/test.bin"};
}

std::vector<unsigned char> encode_cifar_record(const Image& img, int label, int classes) {
  if (img.height != 32 || img.width != 32 || img.channels != 3)
    throw std::invalid_argument("encode_cifar_record: image must be 32x32x3");
  if (label < 0 || label >= classes)
    throw std::invalid_argument("encode_cifar_record: label out of range");
  std::vector<unsigned char> rec;
  rec.reserve(cifar_record_bytes(classes));
  if (classes == 100) rec.push_back(0);  // coarse label, unused by the loader
  rec.push_back(static_cast<unsigned char>(label));
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const float v = std::clamp(img.at(y, x, c), 0.0f, 1.0f);
        rec.push_back(static_cast<unsigned char>(std::floor(v * 255.0f + 0.5f)));
      }
  return rec;
}

}  // namespace augb
