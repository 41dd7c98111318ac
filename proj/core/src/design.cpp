#include "e2nn/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "e2nn/error.hpp"

namespace e2nn {

namespace {

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Point> lhs_design(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw Error(ErrorCode::InvalidArgument, "lhs_design needs n >= 1 and d >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> pts(n, Point(d));
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(perm[i]) + unit(rng)) / static_cast<double>(n);
      pts[i][j] = std::clamp(-1.0 + 2.0 * u, -1.0, 1.0);
    }
  }
  return pts;
}

std::vector<Point> halton_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d > std::size(kPrimes)) throw Error(ErrorCode::InvalidArgument, "halton: dimension too high");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Point shift(d);
  for (auto& s : shift) s = unit(rng);
  std::vector<Point> pts(n, Point(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double u = radical_inverse(i + 1, kPrimes[j]) + shift[j];
      u -= std::floor(u);
      pts[i][j] = -1.0 + 2.0 * u;
    }
  }
  return pts;
}

}  // namespace e2nn
