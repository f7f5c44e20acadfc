// SPDX-License-Identifier: MIT
/// @file fim.hpp
/// @brief Fisher information of the stacked observation for each
///        location-parameter half jointly with that half's path gains, the
///        Jensen-bounded expected form, regularized inversion, and the
///        trace-CRLB objective driving the beamformer.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "jlbo/channel.hpp"
#include "jlbo/config.hpp"
#include "jlbo/derivatives.hpp"
#include "jlbo/geometry.hpp"
#include "jlbo/signal.hpp"

namespace jlbo {

/// Which (location half, gain vector) pair a Fisher matrix describes.
enum class KappaHalf {
  kUeSide,  ///< (RIS position, UE orientation, RIS-UE scatterers) with RIS-UE gains.
  kBsSide,  ///< (UE position, RIS orientation, BS-RIS scatterers) with BS-RIS gains.
};

/// Hermitian Fisher information matrix of [kappa_half; gains]. Ordering:
/// half coordinates first (padding slots structurally zero), then the gains
/// base-station-major path-minor.
struct FisherInfo {
  Eigen::MatrixXcd fim;
  double sigma2 = 0.0;
  KappaHalf half = KappaHalf::kUeSide;
  int location_dim = 0;  ///< leading rows/cols covering the location half.
};

/// Indices of the identifiable rows/cols of a FisherInfo: all location
/// coordinates except padding slots, plus every gain coordinate.
std::vector<int> fim_identifiable(const FisherInfo& info, int n_bs, int n_paths);

/// Fisher information at a fixed gain realization: sigma^-2 [J, F]^H [J, F]
/// with J the gain-weighted sum of per-path location-derivative columns and
/// F the gain-linear factorization for the chosen half.
FisherInfo fisher_information(const Scene& scene, const PathParams& paths,
                              const GainRealization& gains, const BeamWeights& weights,
                              const RisProfile& theta, const SystemConfig& cfg, KappaHalf half,
                              double sigma2);

/// Expected (gain-averaged, Jensen lower bound) Fisher information:
/// block-diagonal with location block sigma^-2 sum_l var_l Xi_l^H Xi_l and
/// gain block sigma^-2 F^H F; cross blocks exactly zero.
FisherInfo expected_fim(const Scene& scene, const PathParams& paths,
                        const GainRealization& gains, const GainVariances& variances,
                        const BeamWeights& weights, const RisProfile& theta,
                        const SystemConfig& cfg, KappaHalf half, double sigma2);

/// Inverse of the identifiable sub-matrix, re-embedded into full dimensions
/// (padding rows/cols zero). A ridge of 1e-12 * trace / dim is added when
/// the sub-matrix condition number exceeds 1e12.
Eigen::MatrixXcd masked_inverse(const Eigen::MatrixXcd& m, const std::vector<int>& keep,
                                int full_dim);

/// Trace of the inverse over the identifiable sub-matrix (no re-embedding).
double inverse_trace(const Eigen::MatrixXcd& m, const std::vector<int>& keep);

/// Trace-CRLB decomposition: crlb1 from the UE-side expected FIM, crlb2 from
/// the BS-side one, total their sum.
struct CrlbValue {
  double crlb1 = 0.0;
  double crlb2 = 0.0;
  double total = 0.0;
};

/// Whole-trace CRLB objective from both expected FIMs (gain blocks
/// included); the quantity the beamformer minimizes.
CrlbValue crlb_total(const Scene& scene, const PathParams& paths, const GainRealization& gains,
                     const GainVariances& variances, const BeamWeights& weights,
                     const RisProfile& theta, const SystemConfig& cfg, double sigma2);

/// Trace over the location sub-block of the full inverse of one FIM
/// (identifiable coordinates only): the location-error bound with the gains
/// treated as jointly estimated nuisance parameters.
double location_crlb_trace(const FisherInfo& info, int n_bs, int n_paths);

}  // namespace jlbo
