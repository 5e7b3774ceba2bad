#include "fastlink/predictor.hpp"

#include <limits>

namespace fastlink::predictor {

PredictorState make_oracle(std::vector<cplx> future) {
  PredictorState s;
  s.kind = PredictorState::Kind::Oracle;
  s.future = std::move(future);
  s.fitted = true;
  return s;
}

PredictorState fit(const std::vector<cplx>& history, int order) {
  if (order < 1) throw ConfigError("predictor::fit: order must be >= 1");
  const int n = static_cast<int>(history.size());
  if (n < 4 * order) throw ConfigError("predictor::fit: history must be at least 4*order long");
  if (!all_finite(history)) throw ConfigError("predictor::fit: history has non-finite samples");

  const int rows = n - order;
  Eigen::MatrixXcd x(rows, order);
  Eigen::VectorXcd y(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < order; ++j) x(i, j) = history[i + order - 1 - j];
    y(i) = history[i + order];
  }

  Eigen::MatrixXcd gram = x.adjoint() * x;
  const double eps = 1e-8 * gram.real().trace() / (static_cast<double>(rows) * order);
  gram += eps * Eigen::MatrixXcd::Identity(order, order);

  PredictorState s;
  s.kind = PredictorState::Kind::LinearMmse;
  s.order = order;
  s.w = gram.ldlt().solve(x.adjoint() * y);
  if (!s.w.allFinite()) throw IntegrityError("predictor::fit: non-finite coefficients");
  s.fitted = true;
  s.window.assign(history.end() - order, history.end());
  return s;
}

fading::CsiSequence predict(const PredictorState& state, int steps) {
  if (steps < 0) throw ConfigError("predictor::predict: steps must be >= 0");
  fading::CsiSequence seq;
  if (steps == 0) return seq;

  if (state.kind == PredictorState::Kind::Oracle) {
    if (static_cast<int>(state.future.size()) < steps)
      throw ConfigError("predictor::predict: oracle future shorter than requested horizon");
    seq.gains.assign(state.future.begin(), state.future.begin() + steps);
    return seq;
  }

  if (!state.fitted) throw IntegrityError("predictor::predict: state not fitted");
  std::vector<cplx> window = state.window;  // oldest first
  seq.gains.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    cplx next = 0.0;
    // w[j] multiplies the sample j lags back.
    for (int j = 0; j < state.order; ++j) next += state.w(j) * window[window.size() - 1 - j];
    seq.gains.push_back(next);
    window.push_back(next);
  }
  return seq;
}

fading::CsiSequence predict_mimo(const std::vector<std::vector<PredictorState>>& states,
                                 int steps) {
  const int nr = static_cast<int>(states.size());
  if (nr < 1) throw ConfigError("predictor::predict_mimo: empty state grid");
  const int nt = static_cast<int>(states[0].size());
  for (const auto& row : states)
    if (static_cast<int>(row.size()) != nt)
      throw ConfigError("predictor::predict_mimo: ragged state grid");

  std::vector<fading::CsiSequence> link(static_cast<std::size_t>(nr) * nt);
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c < nt; ++c)
      link[static_cast<std::size_t>(r) * nt + c] = predict(states[r][c], steps);

  fading::CsiSequence seq;
  seq.matrices.resize(steps);
  for (int n = 0; n < steps; ++n) {
    fading::MatC h(nr, nt);
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nt; ++c) h(r, c) = link[static_cast<std::size_t>(r) * nt + c].gains[n];
    seq.matrices[n] = std::move(h);
  }
  return seq;
}

double nmse(const std::vector<cplx>& pred, const std::vector<cplx>& truth) {
  if (pred.size() != truth.size())
    throw ConfigError("predictor::nmse: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    num += std::norm(pred[i] - truth[i]);
    den += std::norm(truth[i]);
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace fastlink::predictor
