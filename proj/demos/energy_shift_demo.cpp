// Shows how injected anomalies move signal energy across the spectrum: as
// the anomaly rate grows, the low-frequency share of the feature energy
// (eta) falls while the high-frequency area of the label signal rises.

#include <cstdio>

#include "cesgad/spectral.hpp"
#include "cesgad/synthgen.hpp"

int main() {
  const std::uint64_t seed = 7;
  const std::int32_t n = 300;
  const cesgad::MultiRelationGraph base = cesgad::barabasi_albert(n, 2, seed);
  const std::int64_t k = cesgad::default_split_index(n);

  cesgad::InjectionConfig cfg;
  cfg.feat_dim = 8;
  cfg.sigma = 2.0;
  cfg.rho = 2;
  cfg.seed = seed;

  std::printf("%8s %14s %14s %14s\n", "alpha", "eta_features",
              "s_high_labels", "heterophily");
  for (double alpha : {0.0, 0.05, 0.10, 0.20}) {
    cfg.anomaly_ratio = alpha;
    const cesgad::MultiRelationGraph g = cesgad::inject_anomalies(base, cfg);

    const auto dec = cesgad::eigendecompose(
        cesgad::laplacian(g.relation(0), cesgad::LaplacianForm::Regular));
    const double eta = cesgad::pooled_energy_ratio(dec, g.features(), k);

    // The label signal is identically zero when nothing was injected; its
    // high-frequency area is only defined once anomalies exist.
    double s_high = 0.0;
    if (alpha > 0.0) {
      s_high = cesgad::label_high_freq_area(g.relation(0),
                                            cesgad::label_signal(g));
    }
    const double het = cesgad::graph_heterophily(g, 0);
    std::printf("%8.2f %14.6f %14.6f %14.6f\n", alpha, eta, s_high, het);
  }
  std::printf(
      "\nfalling eta and rising s_high show the energy moving into the "
      "high-frequency band as anomalies are added\n");
  return 0;
}
