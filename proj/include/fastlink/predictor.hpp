#pragma once

#include <vector>

#include "fastlink/common.hpp"
#include "fastlink/fading.hpp"

#include <Eigen/Dense>

namespace fastlink::predictor {

/// Channel predictor behind a single interface. Oracle returns the true
/// future (the known-CSI baseline); LinearMmse is a one-step AR(p) model
/// fitted by least squares and run recursively for longer horizons.
struct PredictorState {
  enum class Kind { Oracle, LinearMmse };
  Kind kind = Kind::LinearMmse;

  // Oracle: the true upcoming gains, consumed front-first by predict().
  std::vector<cplx> future;

  // LinearMmse
  int order = 0;
  Eigen::VectorXcd w;  // coefficients, most-recent lag first
  bool fitted = false;
  std::vector<cplx> window;  // last `order` history samples, oldest first
};

PredictorState make_oracle(std::vector<cplx> future);

/// Fits AR(p) one-step coefficients over the history by solving the
/// normal equations (X^H X + eps I) w = X^H y, where row i of X holds
/// [h_{i+p-1}, ..., h_i] and y_i = h_{i+p}. The ridge eps is 1e-8 times
/// the mean squared history magnitude (trace of X^H X over its size).
/// Requires history length >= 4p.
PredictorState fit(const std::vector<cplx>& history, int order);

/// Recursive multi-step prediction: each output is appended to the
/// regression window before predicting the next. Oracle states return
/// the true future slice exactly. steps == 0 yields an empty sequence.
fading::CsiSequence predict(const PredictorState& state, int steps);

/// Entrywise independent prediction over an Nr x Nt grid of states,
/// reassembled into per-slot matrices.
fading::CsiSequence predict_mimo(const std::vector<std::vector<PredictorState>>& states,
                                 int steps);

/// sum |pred - truth|^2 / sum |truth|^2 (0 when both are empty).
double nmse(const std::vector<cplx>& pred, const std::vector<cplx>& truth);

}  // namespace fastlink::predictor
