#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "augablate/data/dataset.hpp"

namespace augb {

// Binary-format records: CIFAR-10 is 1 label byte + 3072 pixel bytes, the
// 100-class variant 2 label bytes (coarse then fine; fine is used) + 3072.
// Pixels are planar RGB, 1024 bytes per plane, row-major inside a plane.
inline constexpr std::size_t cifar_pixel_bytes = 3 * 32 * 32;

inline constexpr std::size_t cifar_record_bytes(int classes) {
  return (classes == 100 ? 2 : 1) + cifar_pixel_bytes;
}

// Loads and concatenates batch files; bytes become floats via value / 255.
// Throws if a file is missing or its size is not a multiple of the record.
Dataset load_cifar(const std::vector<std::string>& files, int classes);

// Conventional file lists under a dataset directory.
std::vector<std::string> cifar10_train_files(const std::string& dir);
std::vector<std::string> cifar10_test_files(const std::string& dir);
std::vector<std::string> cifar100_train_files(const std::string& dir);
std::vector<std::string> cifar100_test_files(const std::string& dir);

// Inverse of the loader for one record (round-half-up quantization); used to
// synthesize format-identical files.
std::vector<unsigned char> encode_cifar_record(const Image& img, int label, int classes);

}  // namespace augb
