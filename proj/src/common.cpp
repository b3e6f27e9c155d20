#include "rlfit/common.hpp"

#include <charconv>
#include <stdexcept>

namespace rlfit {

bool in_domain(const Vec& x, const Domain& omega) {
  if (x.size() != omega.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!omega[i].contains(x[i])) return false;
  }
  return true;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x00000100000001b3ull;
  }
  return h;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

}  // namespace rlfit
