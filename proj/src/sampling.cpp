#include "skewlin/sampling.hpp"

#include <array>

#include "skewlin/errors.hpp"

namespace skewlin {

namespace {

constexpr std::array<unsigned, 16> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double out = 0.0;
  while (i > 0) {
    out += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return out;
}

std::vector<double> halton_point(std::uint64_t i, std::size_t dim) {
  if (dim > kPrimes.size()) throw InvalidArgument("Halton sequence supports at most 16 dimensions");
  std::vector<double> p(dim);
  for (std::size_t j = 0; j < dim; ++j) p[j] = radical_inverse(i, kPrimes[j]);
  return p;
}

std::vector<std::vector<double>> ball_samples(std::size_t dim, std::size_t count, double radius,
                                              bool include_boundary) {
  std::vector<std::vector<double>> out;
  if (count == 0) return out;
  out.emplace_back(dim, 0.0);
  if (include_boundary)
    for (std::size_t j = 0; j < dim && out.size() < count; ++j)
      for (double sgn : {1.0, -1.0}) {
        if (out.size() >= count) break;
        std::vector<double> e(dim, 0.0);
        e[j] = sgn * radius;
        out.push_back(std::move(e));
      }
  std::uint64_t idx = 1;
  bool boundary_turn = include_boundary;
  while (out.size() < count) {
    auto h = halton_point(idx++, dim);
    double norm2 = 0.0;
    for (auto& c : h) {
      c = 2.0 * c - 1.0;
      norm2 += c * c;
    }
    if (norm2 > 1.0 || norm2 == 0.0) continue;
    const double scale = boundary_turn ? radius / std::sqrt(norm2) : radius;
    for (auto& c : h) c *= scale;
    out.push_back(std::move(h));
    if (include_boundary) boundary_turn = !boundary_turn;
  }
  return out;
}

}  // namespace skewlin
