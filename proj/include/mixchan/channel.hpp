#pragma once

#include <complex>
#include <vector>

namespace mixchan {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s, exact

/// One multipath tap: linear amplitude, propagation delay, carrier-induced
/// phase reduced to [0, 2*pi).
struct ChannelTap {
    double gain;
    double delay_s;
    double phase_rad;
};

/// Tap-delay-line impulse response; taps ordered by non-decreasing delay.
struct ChannelImpulseResponse {
    std::vector<ChannelTap> taps;
};

/// Throws DomainError unless the response has at least one tap, non-negative
/// gains and delays, phases in [0, 2*pi), and non-decreasing delays.
void validate(const ChannelImpulseResponse& cir);

/// Link budget in dB terms: transmit power, path-loss exponent, antenna
/// misalignment margin, and separation distance.
struct LinkBudget {
    double p_tx_dbm;
    double exponent;
    double misalignment_db;
    double distance_m;
};

/// Single line-of-sight tap with delay d/c and phase 2*pi*f_c*t0 mod 2*pi.
ChannelImpulseResponse los_channel(double distance_m, double carrier_hz, double gain);

/// |s21|^2 * p_tx, in the linear units of p_tx.
double received_power_from_s21(std::complex<double> s21, double p_tx_linear);

/// P_TX - 10 n log10(d) + M, in dBm.
double path_loss_rx_power_db(const LinkBudget& budget);

/// Dimensionless linear SNR p_rx / (W * N0).
double instantaneous_snr(double p_rx_linear, double bandwidth_hz, double n0);

}  // namespace mixchan
