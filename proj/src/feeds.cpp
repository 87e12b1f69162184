#include "dcp/feeds.hpp"

#include <cmath>

#include "dcp/constants.hpp"
#include "dcp/errors.hpp"

namespace dcp {

double FeedNetwork::q_loaded() const {
  double inv = 1.0 / Q0;
  for (const auto& f : feeds) inv += 1.0 / f.Q;
  return 1.0 / inv;
}

double FeedNetwork::gamma(double omega) const { return omega / (2.0 * q_loaded()); }

double alpha(double delta_omega, double gamma) { return delta_omega / gamma; }

std::vector<std::complex<double>> feed_weights(const FeedNetwork& net) {
  std::complex<double> norm = 0.0;
  for (const auto& f : net.feeds) norm += f.xi * std::polar(1.0, f.psi);
  const double q0_q = net.Q0 / net.q_loaded();
  std::vector<std::complex<double>> c;
  c.reserve(net.feeds.size());
  for (const auto& f : net.feeds)
    c.push_back(f.xi * std::polar(1.0, f.psi) / norm * q0_q - net.Q0 / f.Q);
  return c;
}

std::complex<double> network_factor(const FeedNetwork& net, int m) {
  auto c = feed_weights(net);
  std::complex<double> s = 0.0;
  for (size_t j = 0; j < c.size(); ++j) s += c[j] * std::cos(m * net.feeds[j].phi);
  return s;
}

double amplitude_scale(const FeedNetwork& net, int m) { return network_factor(net, m).real(); }

std::complex<double> phase_imbalance_scale(double q0_over_q, double phi_rel, int m) {
  if (m % 2 == 0) return 1.0;
  return std::complex<double>(0.0, std::tan(0.5 * phi_rel) * q0_over_q);
}

double observable_scale(std::complex<double> c, double a) { return c.real() + a * c.imag(); }

double observable_gradient_scale(double delta_omega, double gamma, double q0_over_q,
                                 double phi_rel, int m) {
  return observable_scale(phase_imbalance_scale(q0_over_q, phi_rel, m), alpha(delta_omega, gamma)) -
         (m % 2 == 0 ? 1.0 : 0.0);
}

double azimuthal_width_factor(int m, double width_phi) {
  const double x = 0.5 * m * width_phi;
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

FeedNetwork preset_network(const std::string& name, const std::vector<double>& planes) {
  std::vector<double> phis;
  if (name == "single_weak" || name == "alternate_left") {
    phis = {0.0};
  } else if (name == "alternate_right") {
    phis = {pi};
  } else if (name == "two_balanced") {
    phis = {0.0, pi};
  } else if (name == "ring_waveguide") {
    phis = {0.25 * pi, -0.25 * pi, 0.75 * pi, -0.75 * pi};
  } else {
    throw Error(ErrorCode::Config, "unknown feed preset '" + name + "'");
  }
  if (planes.empty()) throw Error(ErrorCode::Config, "feed preset needs at least one plane");
  FeedNetwork net;
  const double xi = 1.0 / double(phis.size() * planes.size());
  for (double z : planes)
    for (double p : phis) net.feeds.push_back({p, z, xi, 0.0, std::numeric_limits<double>::infinity()});
  return net;
}

FeedNetwork case_single_overcoupled(double q0, double q1) {
  FeedNetwork n;
  n.Q0 = q0;
  n.feeds = {{0.0, 0.0, 1.0, 0.0, q1}};
  return n;
}

FeedNetwork case_single_feed_two_losses(double q0, double q1, double q2) {
  FeedNetwork n;
  n.Q0 = q0;
  n.feeds = {{0.0, 0.0, 1.0, 0.0, q1}, {pi, 0.0, 0.0, 0.0, q2}};
  return n;
}

FeedNetwork case_unequal_feeds_equal_losses(double q0, double eps, double q_l) {
  FeedNetwork n;
  n.Q0 = q0;
  n.feeds = {{0.0, 0.0, 0.5 * (1 + 0.5 * eps), 0.0, 2 * q_l},
             {pi, 0.0, 0.5 * (1 - 0.5 * eps), 0.0, 2 * q_l}};
  return n;
}

FeedNetwork case_equal_feeds_unequal_losses(double q0, double eps, double q_l) {
  FeedNetwork n;
  n.Q0 = q0;
  n.feeds = {{0.0, 0.0, 0.5, 0.0, 2 * (1 + 0.5 * eps) * q_l},
             {pi, 0.0, 0.5, 0.0, 2 * (1 - 0.5 * eps) * q_l}};
  return n;
}

FeedNetwork case_matched_unequal(double q0, double eps, double q_l) {
  FeedNetwork n;
  n.Q0 = q0;
  n.feeds = {{0.0, 0.0, 0.5 * (1 + 0.5 * eps), 0.0, 2 * (1 - 0.5 * eps) * q_l},
             {pi, 0.0, 0.5 * (1 - 0.5 * eps), 0.0, 2 * (1 + 0.5 * eps) * q_l}};
  return n;
}

FeedNetwork case_phase_imbalance(double q0, double phi_rel, double q_l) {
  FeedNetwork n;
  n.Q0 = q0;
  n.feeds = {{0.0, 0.0, 0.5, 0.5 * phi_rel, 2 * q_l}, {pi, 0.0, 0.5, -0.5 * phi_rel, 2 * q_l}};
  return n;
}

}  // namespace dcp
