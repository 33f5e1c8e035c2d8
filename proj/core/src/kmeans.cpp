#include "emvb/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Core>

#include "emvb/error.hpp"

namespace emvb {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

constexpr std::size_t kAssignBlock = 1024;

std::vector<float> gather_rows(std::span<const float> points, std::size_t dim,
                               const std::vector<std::size_t>& rows) {
  std::vector<float> out(rows.size() * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(points.data() + rows[i] * dim, dim, out.data() + i * dim);
  }
  return out;
}

std::vector<float> seed_plus_plus(std::span<const float> points, std::size_t dim, std::size_t k,
                                  std::mt19937_64& rng) {
  const std::size_t n = points.size() / dim;
  const ConstRowMap all(points.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::vector<float> centroids(k * dim);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<std::size_t> pick_any(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::size_t chosen = pick_any(rng);
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      if (total > 0.0) {
        double target = unit(rng) * total;
        chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          target -= d2[i];
          if (target < 0.0 && d2[i] > 0.0) {
            chosen = i;
            break;
          }
        }
        while (d2[chosen] == 0.0) --chosen;  // rounding tail guard
      } else {
        chosen = pick_any(rng);
      }
    }
    const Eigen::RowVectorXf x = all.row(static_cast<Eigen::Index>(chosen));
    std::copy_n(x.data(), dim, centroids.data() + c * dim);
    const Eigen::VectorXf dist = (all.rowwise() - x).rowwise().squaredNorm();
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], static_cast<double>(dist[static_cast<Eigen::Index>(i)]));
    }
  }
  return centroids;
}

}  // namespace

void assign_nearest(std::span<const float> points, std::size_t dim, std::span<const float> centroids,
                    bool spherical, std::span<std::uint32_t> assignment,
                    std::span<float> sq_distance) {
  const std::size_t n = points.size() / dim;
  const std::size_t k = centroids.size() / dim;
  if (k == 0) throw Error("no centroids to assign to");
  const ConstRowMap c(centroids.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
  const Eigen::VectorXf c_norms = c.rowwise().squaredNorm();

  RowMatrix scores;
  for (std::size_t begin = 0; begin < n; begin += kAssignBlock) {
    const std::size_t rows = std::min(kAssignBlock, n - begin);
    const ConstRowMap x(points.data() + begin * dim, static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(dim));
    scores.noalias() = x * c.transpose();
    for (std::size_t r = 0; r < rows; ++r) {
      const float* row = scores.data() + r * k;
      std::size_t best = 0;
      float best_value = -std::numeric_limits<float>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        // max dot for unit vectors, otherwise min of |c|^2 - 2 x.c
        const float v = spherical ? row[j] : 2.0f * row[j] - c_norms[static_cast<Eigen::Index>(j)];
        if (v > best_value) {
          best_value = v;
          best = j;
        }
      }
      assignment[begin + r] = static_cast<std::uint32_t>(best);
      if (!sq_distance.empty()) {
        const float x_norm = x.row(static_cast<Eigen::Index>(r)).squaredNorm();
        const float d = x_norm + c_norms[static_cast<Eigen::Index>(best)] - 2.0f * row[best];
        sq_distance[begin + r] = std::max(d, 0.0f);
      }
    }
  }
}

KMeansResult kmeans(std::span<const float> points, std::size_t dim, const KMeansOptions& opts) {
  if (dim == 0 || points.size() % dim != 0) throw Error("k-means points are not a multiple of dim");
  const std::size_t n_all = points.size() / dim;
  if (n_all == 0) throw Error("k-means on an empty point set");
  if (opts.k == 0) throw Error("k-means needs k >= 1");
  if (opts.iters == 0) throw Error("k-means needs at least one iteration");

  std::mt19937_64 rng(opts.seed);

  // Training set: subsample or pad by resampling.
  std::vector<float> sampled;
  std::span<const float> train = points;
  if (opts.max_points != 0 && n_all > opts.max_points && opts.max_points >= opts.k) {
    std::vector<std::size_t> idx(n_all);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < opts.max_points; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n_all - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(opts.max_points);
    std::sort(idx.begin(), idx.end());
    sampled = gather_rows(points, dim, idx);
    train = sampled;
  } else if (n_all < opts.k) {
    std::vector<std::size_t> idx(opts.k);
    std::iota(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_all), std::size_t{0});
    std::uniform_int_distribution<std::size_t> pick(0, n_all - 1);
    for (std::size_t i = n_all; i < opts.k; ++i) idx[i] = pick(rng);
    sampled = gather_rows(points, dim, idx);
    train = sampled;
  }
  const std::size_t n = train.size() / dim;
  const std::size_t k = opts.k;

  KMeansResult result;
  result.centroids = seed_plus_plus(train, dim, k, rng);

  std::vector<std::uint32_t> assignment(n);
  std::vector<float> dist(n);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);

  for (std::size_t it = 0; it < opts.iters; ++it) {
    assign_nearest(train, dim, result.centroids, opts.spherical, assignment, dist);
    const double err = std::accumulate(dist.begin(), dist.end(), 0.0) / static_cast<double>(n);
    result.error_history.push_back(err);

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = assignment[i];
      ++counts[c];
      const float* x = train.data() + i * dim;
      double* s = sums.data() + c * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += x[d];
    }

    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      float* centroid = result.centroids.data() + c * dim;
      const double* s = sums.data() + c * dim;
      double norm = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = s[d] / static_cast<double>(counts[c]);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (opts.spherical && norm == 0.0) continue;  // antipodal members, keep the old direction
      const double scale = opts.spherical ? 1.0 / (norm * static_cast<double>(counts[c]))
                                          : 1.0 / static_cast<double>(counts[c]);
      for (std::size_t d = 0; d < dim; ++d) centroid[d] = static_cast<float>(s[d] * scale);
    }

    // Empty clusters take over the points farthest from their centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (dist[i] > dist[far]) far = i;
      }
      std::copy_n(train.data() + far * dim, dim, result.centroids.data() + c * dim);
      dist[far] = -1.0f;
    }
  }
  return result;
}

}  // namespace emvb
