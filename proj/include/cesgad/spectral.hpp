#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cesgad/error.hpp"
#include "cesgad/graph.hpp"

namespace cesgad {

// Eigendecomposition of a symmetric Laplacian: eigenvalues ascending,
// eigenvector columns orthonormal and sign-fixed so that each column's
// largest-magnitude entry is positive (ties broken by lowest index). The sign
// rule makes the basis reproducible across runs and library versions wherever
// eigenvalues are simple.
struct SpectralDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // column k pairs with eigenvalues[k]
};

inline void fix_eigenvector_signs(Matrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double mag = std::abs(u(r, c));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    if (u(arg, c) < 0.0) u.col(c) = -u.col(c);
  }
}

inline SpectralDecomposition eigendecompose(const LaplacianMatrix& lap) {
  const Matrix& m = lap.values;
  if (m.rows() != m.cols()) {
    throw data_error("eigendecompose: matrix is not square");
  }
  require_dense_capacity(m.rows(), "eigendecompose");
  if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw data_error("eigendecompose: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw data_error("eigendecompose: solver failed to converge");
  }
  SpectralDecomposition dec{solver.eigenvalues(), solver.eigenvectors()};
  fix_eigenvector_signs(dec.eigenvectors);
  return dec;
}

// Projection of a node signal onto the eigenvector basis.
inline Vector graph_fourier_transform(const SpectralDecomposition& dec,
                                      const Vector& x) {
  if (x.size() != dec.eigenvectors.rows()) {
    throw data_error("graph fourier transform: signal length " +
                     std::to_string(x.size()) + " does not match basis size " +
                     std::to_string(dec.eigenvectors.rows()));
  }
  return dec.eigenvectors.transpose() * x;
}

// Normalized per-index spectral energy; entries are non-negative and sum to 1.
inline Vector energy_distribution(const Vector& xhat) {
  const double total = xhat.squaredNorm();
  if (total == 0.0) {
    throw data_error("energy distribution: zero signal");
  }
  return xhat.array().square() / total;
}

// Cumulative energy share of the first k spectrum indices, 1 <= k <= N.
inline double energy_ratio(const Vector& xhat, std::int64_t k) {
  if (k < 1 || k > xhat.size()) {
    throw data_error("energy ratio: split index " + std::to_string(k) +
                     " outside [1, " + std::to_string(xhat.size()) + "]");
  }
  Vector e = energy_distribution(xhat);
  return e.head(k).sum();
}

enum class HighFreqMethod {
  Spectral,   // sum_k lambda_k * xhat_k^2 / sum_k xhat_k^2
  Quadratic,  // x^T L x / x^T x, no eigendecomposition
};

// Rayleigh quotient of the Laplacian: the energy-weighted mean eigenvalue of
// the signal. The two methods are algebraically identical and serve as
// independent implementations of each other.
inline double high_freq_area(const LaplacianMatrix& lap, const Vector& x,
                             HighFreqMethod method) {
  if (x.size() != lap.values.rows()) {
    throw data_error("high-frequency area: signal length does not match laplacian");
  }
  const double total = x.squaredNorm();
  if (total == 0.0) {
    throw data_error("high-frequency area: zero signal");
  }
  if (method == HighFreqMethod::Quadratic) {
    return x.dot(lap.values * x) / total;
  }
  SpectralDecomposition dec = eigendecompose(lap);
  Vector xhat = graph_fourier_transform(dec, x);
  return dec.eigenvalues.dot(xhat.array().square().matrix()) / xhat.squaredNorm();
}

// High-frequency area of a 0/1 label signal on the regular Laplacian, computed
// combinatorially: (number of heterophilic edges) / (number of labeled ones).
inline double label_high_freq_area(const EdgeSet& e, const Vector& y) {
  if (y.size() != e.num_nodes()) {
    throw data_error("label high-frequency area: label length does not match graph");
  }
  std::int64_t ones = 0;
  for (double v : y) {
    if (v != 0.0 && v != 1.0) {
      throw data_error("label high-frequency area: labels must be 0 or 1");
    }
    ones += (v == 1.0);
  }
  if (ones == 0) {
    throw data_error("label high-frequency area: all-zero label signal");
  }
  std::int64_t hetero = 0;
  for (const auto& [a, b] : e.edges()) hetero += (y[a] != y[b]);
  return static_cast<double>(hetero) / static_cast<double>(ones);
}

// Default cumulative-energy split: the lowest quarter of the spectrum.
inline std::int64_t default_split_index(std::int64_t n) { return (n + 3) / 4; }

struct SpectrumReport {
  Vector eigenvalues;
  Vector energy;      // normalized per-index energy
  Vector cumulative;  // running sum of `energy`
  std::int64_t split_k = 0;
  double energy_ratio_at_k = 0.0;
  double s_high = 0.0;
};

inline SpectrumReport make_spectrum_report(const SpectralDecomposition& dec,
                                           const Vector& x, std::int64_t k) {
  Vector xhat = graph_fourier_transform(dec, x);
  SpectrumReport rep;
  rep.eigenvalues = dec.eigenvalues;
  rep.energy = energy_distribution(xhat);
  rep.cumulative.resize(rep.energy.size());
  double run = 0.0;
  for (Eigen::Index i = 0; i < rep.energy.size(); ++i) {
    run += rep.energy[i];
    rep.cumulative[i] = run;
  }
  if (k < 1 || k > rep.energy.size()) {
    throw data_error("spectrum report: split index out of range");
  }
  rep.split_k = k;
  rep.energy_ratio_at_k = rep.energy.head(k).sum();
  rep.s_high = dec.eigenvalues.dot(rep.energy);
  return rep;
}

// Spectrum report for a multi-channel signal: per-index energies are summed
// across channels before normalizing, otherwise identical to the
// single-signal report.
inline SpectrumReport make_pooled_spectrum_report(
    const SpectralDecomposition& dec, const Matrix& x, std::int64_t k) {
  if (x.rows() != dec.eigenvectors.rows()) {
    throw data_error("spectrum report: signal rows do not match basis size");
  }
  const Matrix xhat = dec.eigenvectors.transpose() * x;
  const Vector raw = xhat.array().square().rowwise().sum();
  const double total = raw.sum();
  if (total == 0.0) {
    throw data_error("spectrum report: zero signal has no energy distribution");
  }
  SpectrumReport rep;
  rep.eigenvalues = dec.eigenvalues;
  rep.energy = raw / total;
  rep.cumulative.resize(rep.energy.size());
  double run = 0.0;
  for (Eigen::Index i = 0; i < rep.energy.size(); ++i) {
    run += rep.energy[i];
    rep.cumulative[i] = run;
  }
  if (k < 1 || k > rep.energy.size()) {
    throw data_error("spectrum report: split index out of range");
  }
  rep.split_k = k;
  rep.energy_ratio_at_k = rep.energy.head(k).sum();
  rep.s_high = dec.eigenvalues.dot(rep.energy);
  return rep;
}

// Energy ratio pooled over the columns of a multi-channel signal: per-index
// energies are summed across channels before normalizing.
inline double pooled_energy_ratio(const SpectralDecomposition& dec,
                                  const Matrix& x, std::int64_t k) {
  if (x.rows() != dec.eigenvectors.rows()) {
    throw data_error("pooled energy ratio: signal rows do not match basis size");
  }
  if (k < 1 || k > x.rows()) {
    throw data_error("pooled energy ratio: split index out of range");
  }
  Matrix xhat = dec.eigenvectors.transpose() * x;
  Vector energy = xhat.array().square().rowwise().sum();
  const double total = energy.sum();
  if (total == 0.0) {
    throw data_error("pooled energy ratio: zero signal");
  }
  return energy.head(k).sum() / total;
}

}  // namespace cesgad
