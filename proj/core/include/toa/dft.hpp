// Unitary DFT helpers shared by the waveform and estimator code.
#pragma once

#include <vector>

#include "toa/types.hpp"

namespace toa {

// Signed frequency index for DFT bin m of an N-point transform:
// m for m <= floor((N-1)/2), m - N above. Matches the phase-ramp convention
// used to express a delay as a per-bin rotation.
std::vector<int> dft_indices(int n);

// Element m is exp(-j 2 pi k_m tau / (N T_s)) with k_m from dft_indices.
// Multiplying a length-N spectrum by this ramp delays the time signal by tau
// (circularly).
VectorXcd phase_ramp(double tau, int n, double sample_period);

// Dense unitary DFT of a fixed length. The matrix is precomputed once from
// exact N-th roots of unity and then applied with matrix products; at the
// window lengths used here (N around 150) this costs far less than the
// eigendecompositions downstream and keeps the transform bit-deterministic.
// Immutable after construction, safe to share across threads.
class UnitaryDft {
 public:
  explicit UnitaryDft(int n);

  int size() const { return n_; }

  VectorXcd forward(const VectorXcd& x) const;
  VectorXcd inverse(const VectorXcd& x) const;

  // Applies the transform to each row of y (windows store one antenna per
  // row, time along columns).
  MatrixXcd rows_forward(const MatrixXcd& y) const;

 private:
  int n_;
  MatrixXcd matrix_;  // symmetric: F^T = F
};

}  // namespace toa
