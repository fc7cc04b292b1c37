#include "qcflow/dopri5.hpp"

#include <algorithm>
#include <cmath>

#include "qcflow/errors.hpp"

namespace qcflow {

namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kFacMin = 0.2;   // largest shrink is 1/5
constexpr double kFacMax = 10.0;  // largest growth is 10x

}  // namespace

Dopri5::Dopri5(Rhs f, double abs_tol, double rel_tol)
    : rhs_(std::move(f)), atol_(abs_tol), rtol_(rel_tol) {}

void Dopri5::reset(double t, Vector y) {
  t_ = t;
  t_prev_ = t;
  y_ = std::move(y);
  f_ = rhs_(y_);
  last_rejected_ = false;
}

double Dopri5::error_norm(const Vector& err, const Vector& y0, const Vector& y1) const {
  const auto sk = atol_ + rtol_ * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array();
  return std::sqrt((err.array() / sk).square().mean());
}

double Dopri5::initial_step(double t_end) const {
  const double span = t_end - t_;
  const auto sk = atol_ + rtol_ * y_.cwiseAbs().array();
  const double dnf = std::sqrt((f_.array() / sk).square().mean());
  const double dny = std::sqrt((y_.array() / sk).square().mean());
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  // Extreme tolerances overflow the scaled norms.
  if (!std::isfinite(h) || h <= 0.0) h = 1e-6;
  h = std::min(h, span);
  const Vector y1 = y_ + h * f_;
  const Vector f1 = rhs_(y1);
  const double der2 = std::sqrt(((f1 - f_).array() / sk).square().mean()) / h;
  const double der12 = std::max(std::abs(der2), dnf);
  double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                             : std::pow(0.01 / der12, 0.2);
  if (!std::isfinite(h1) || h1 <= 0.0) h1 = h;
  return std::min({100.0 * h, h1, span});
}

Dopri5::Status Dopri5::step(double t_end) {
  if (h_ <= 0.0) h_ = initial_step(t_end);
  const Eigen::Index dim = y_.size();
  Vector y1(dim), ytmp(dim);
  while (true) {
    const double scale = std::max(std::abs(t_), 1.0);
    if (h_ < 1e-14 * scale) return Status::Stalled;
    bool last = false;
    double h = h_;
    if (t_ + h >= t_end) {
      h = t_end - t_;
      last = true;
    }
    const Vector& k1 = f_;
    ytmp = y_ + h * a21 * k1;
    const Vector k2 = rhs_(ytmp);
    ytmp = y_ + h * (a31 * k1 + a32 * k2);
    const Vector k3 = rhs_(ytmp);
    ytmp = y_ + h * (a41 * k1 + a42 * k2 + a43 * k3);
    const Vector k4 = rhs_(ytmp);
    ytmp = y_ + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    const Vector k5 = rhs_(ytmp);
    ytmp = y_ + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const Vector k6 = rhs_(ytmp);
    y1 = y_ + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vector k7 = rhs_(y1);
    if (!y1.allFinite() || !k7.allFinite()) {
      throw NumericalError("Dopri5: non-finite state at t = " + std::to_string(t_ + h));
    }
    const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y_, y1);

    const double fac11 = std::pow(en, kExpo);
    if (en <= 1.0) {
      double fac = fac11 / std::pow(fac_old_, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
      double h_new = h / fac;
      if (last_rejected_) h_new = std::min(h_new, h);
      fac_old_ = std::max(en, 1e-4);

      cont_[0] = y_;
      cont_[1] = y1 - y_;
      cont_[2] = h * k1 - cont_[1];
      cont_[3] = cont_[1] - h * k7 - cont_[2];
      cont_[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

      t_prev_ = t_;
      t_ = last ? t_end : t_ + h;
      y_ = y1;
      f_ = k7;
      // Keep the controller's proposal even when this step was clipped at t_end.
      h_ = last ? std::max(h_new, h_) : h_new;
      last_rejected_ = false;
      ++accepted_;
      return Status::Accepted;
    }
    h_ = h / std::min(1.0 / kFacMin, fac11 / kSafety);
    last_rejected_ = true;
    ++rejected_;
  }
}

Vector Dopri5::dense(double t) const {
  const double h = t_ - t_prev_;
  if (h <= 0.0) return y_;
  const double s = (t - t_prev_) / h;
  const double s1 = 1.0 - s;
  return cont_[0] + s * (cont_[1] + s1 * (cont_[2] + s * (cont_[3] + s1 * cont_[4])));
}

}  // namespace qcflow
