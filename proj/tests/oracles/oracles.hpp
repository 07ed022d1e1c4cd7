#pragma once

// Reference implementations written without reference to the library code.
// They favour obviousness over speed and share no helpers with src/.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

struct Proto {
  Vec w;
  double c = 1.0;
};

inline double dist(const Vec& a, const Vec& b) {
  long double s = 0.0L;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const long double d = static_cast<long double>(a[j]) - b[j];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s));
}

// Mathematically equal distances can round differently; treat them as ties.
inline bool tied(double d, double best) { return d <= best * (1.0 + 1e-12); }

inline Vec weighted_mean(const Vec& a, double ca, const Vec& b, double cb) {
  Vec out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = (ca * a[j] + cb * b[j]) / (ca + cb);
  return out;
}

// One ExStream step: (w_i c_i + w_j c_j) / (c_i + c_j) into slot i, new point into slot j.
inline std::vector<Proto> exstream_step(std::vector<Proto> buf, std::size_t b, const Vec& x) {
  if (buf.size() < b) {
    buf.push_back({x, 1.0});
    return buf;
  }
  if (buf.size() == 1) {
    buf[0].w = weighted_mean(buf[0].w, buf[0].c, x, 1.0);
    buf[0].c += 1.0;
    return buf;
  }
  // Every pair in lexicographic (i, j) order; the first one tied with the minimum wins.
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < buf.size(); ++i)
    for (std::size_t j = i + 1; j < buf.size(); ++j) pairs.emplace_back(dist(buf[i].w, buf[j].w), i, j);
  const double best = std::get<0>(*std::min_element(pairs.begin(), pairs.end()));
  const auto [d, i, j] = *std::find_if(pairs.begin(), pairs.end(), [&](const auto& p) { return tied(std::get<0>(p), best); });
  (void)d;
  buf[i].w = weighted_mean(buf[i].w, buf[i].c, buf[j].w, buf[j].c);
  buf[i].c += buf[j].c;
  buf[j] = {x, 1.0};
  return buf;
}

inline std::vector<Proto> online_kmeans_step(std::vector<Proto> buf, std::size_t b, const Vec& x) {
  if (buf.size() < b) {
    buf.push_back({x, 1.0});
    return buf;
  }
  double closest = dist(buf[0].w, x);
  for (const auto& p : buf) closest = std::min(closest, dist(p.w, x));
  std::size_t best = 0;
  while (!tied(dist(buf[best].w, x), closest)) ++best;
  buf[best].w = weighted_mean(buf[best].w, buf[best].c, x, 1.0);
  buf[best].c += 1.0;
  return buf;
}

inline std::deque<Vec> queue_step(std::deque<Vec> q, std::size_t b, const Vec& x) {
  q.push_back(x);
  while (q.size() > b) q.pop_front();
  return q;
}

// Bits for the k*l smallest (radius, cluster, dim) triples, then a fix-up for
// clusters that received none.
inline std::vector<std::vector<bool>> hpstream_bits(const std::vector<Vec>& radii, std::size_t l) {
  const std::size_t k = radii.size();
  const std::size_t d = k ? radii[0].size() : 0;
  std::vector<std::tuple<double, std::size_t, std::size_t>> all;
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j) all.emplace_back(radii[c][j], c, j);
  std::sort(all.begin(), all.end());
  std::vector<std::vector<bool>> bits(k, std::vector<bool>(d, false));
  for (std::size_t n = 0; n < std::min(all.size(), k * l); ++n)
    bits[std::get<1>(all[n])][std::get<2>(all[n])] = true;
  for (std::size_t c = 0; c < k; ++c) {
    if (std::find(bits[c].begin(), bits[c].end(), true) != bits[c].end()) continue;
    std::size_t m = 0;
    for (std::size_t j = 1; j < d; ++j)
      if (radii[c][j] < radii[c][m]) m = j;
    bits[c][m] = true;
  }
  return bits;
}

// Mean of ratios; no alignment handling.
inline double omega(const std::vector<double>& stream, const std::vector<double>& offline) {
  double s = 0.0;
  for (std::size_t t = 0; t < stream.size(); ++t) s += stream[t] / offline[t];
  return s / static_cast<double>(stream.size());
}

// Central differences of f around x, one coordinate at a time.
inline Vec finite_difference(const std::function<double()>& f, std::vector<double*> coords,
                             double eps) {
  Vec g;
  g.reserve(coords.size());
  for (double* p : coords) {
    const double saved = *p;
    *p = saved + eps;
    const double up = f();
    *p = saved - eps;
    const double down = f();
    *p = saved;
    g.push_back((up - down) / (2.0 * eps));
  }
  return g;
}

// |a - n| / max(|a|, |n|, floor): the relative error used by gradient checks.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

}  // namespace oracle
