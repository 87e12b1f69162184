#pragma once

#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace dcp {

struct Feed {
  double phi = 0.0;  // rad
  double z = 0.0;    // m
  double xi = 1.0;   // amplitude fraction; fractions sum to 1
  double psi = 0.0;  // drive phase, rad
  double Q = std::numeric_limits<double>::infinity();  // coupling Q, inf = weak
};

struct FeedNetwork {
  std::vector<Feed> feeds;
  double Q0 = 30000.0;       // wall quality factor
  double delta_omega = 0.0;  // omega - omega_cav, rad/s
  double width_z = 1e-3;     // feed aperture height, m
  double width_phi = 0.0;    // feed aperture arc, rad (0 = point feed)

  double q_loaded() const;
  // Cavity halfwidth Gamma = omega/(2 Q_loaded).
  double gamma(double omega) const;
};

double alpha(double delta_omega, double gamma);

// Complex weight of feed j relative to a single weakly coupled feed:
//   c_j = xi_j exp(i psi_j)/N * Q0/Q - Q0/Q_j,   N = sum xi_j exp(i psi_j).
// The weights always sum to 1, so the standing wave is unchanged.
std::vector<std::complex<double>> feed_weights(const FeedNetwork& net);

// Complex factor on the m-th loss field of a single weak feed at phi = 0:
// sum_j c_j cos(m phi_j). For two feeds at 0 and pi with equal phases this is
// xi1 Q0/Q - Q0/Q1 + (-1)^m (xi2 Q0/Q - Q0/Q2).
std::complex<double> network_factor(const FeedNetwork& net, int m);

// Real part of network_factor for in-phase networks.
double amplitude_scale(const FeedNetwork& net, int m);

// Two identical balanced feeds at 0 and pi with relative phase phi_rel, on
// resonance: odd m -> i tan(phi_rel/2) Q0/Q, even m -> 1.
std::complex<double> phase_imbalance_scale(double q0_over_q, double phi_rel, int m);

// The part of a complex loss-field factor c that generates phase,
// Im[(alpha + i) c] = Re(c) + alpha Im(c).
double observable_scale(std::complex<double> c, double alpha);

// Phase-generating scale of the odd-m gradient for a detuned cavity with a
// feed phase imbalance: (delta_omega Q0/(Gamma Q)) tan(phi_rel/2).
double observable_gradient_scale(double delta_omega, double gamma, double q0_over_q,
                                 double phi_rel, int m);

// Width factor of a feed of arc width w in the cos(m phi) expansion,
// relative to a point feed: sin(m w/2)/(m w/2).
double azimuthal_width_factor(int m, double width_phi);

// Named networks. `planes` lists feed heights; each azimuthal feed is repeated
// on every plane with the amplitude split evenly.
FeedNetwork preset_network(const std::string& name, const std::vector<double>& planes = {0.0});

// Canonical two-port arrangements; q_l is the combined coupling Q of the feeds.
FeedNetwork case_single_overcoupled(double q0, double q1);
FeedNetwork case_single_feed_two_losses(double q0, double q1, double q2);
FeedNetwork case_unequal_feeds_equal_losses(double q0, double eps, double q_l);
FeedNetwork case_equal_feeds_unequal_losses(double q0, double eps, double q_l);
FeedNetwork case_matched_unequal(double q0, double eps, double q_l);
FeedNetwork case_phase_imbalance(double q0, double phi_rel, double q_l);

}  // namespace dcp
