#include "mixchan/channel.hpp"

#include <cmath>
#include <string>

#include "mixchan/errors.hpp"

namespace mixchan {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void validate(const ChannelImpulseResponse& cir) {
    if (cir.taps.empty()) {
        throw DomainError("channel impulse response needs at least one tap");
    }
    double prev_delay = 0.0;
    for (const ChannelTap& tap : cir.taps) {
        if (!(tap.gain >= 0.0) || !std::isfinite(tap.gain)) {
            throw DomainError("channel tap gain must be non-negative");
        }
        if (!(tap.delay_s >= prev_delay)) {
            throw DomainError("channel tap delays must be non-decreasing");
        }
        if (!(tap.phase_rad >= 0.0) || !(tap.phase_rad < kTwoPi)) {
            throw DomainError("channel tap phase must lie in [0, 2*pi)");
        }
        prev_delay = tap.delay_s;
    }
}

ChannelImpulseResponse los_channel(double distance_m, double carrier_hz, double gain) {
    if (!(distance_m > 0.0) || !std::isfinite(distance_m)) {
        throw DomainError("los_channel: distance must be positive, got " +
                          std::to_string(distance_m));
    }
    if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz)) {
        throw DomainError("los_channel: carrier frequency must be positive, got " +
                          std::to_string(carrier_hz));
    }
    if (!(gain >= 0.0) || !std::isfinite(gain)) {
        throw DomainError("los_channel: gain must be non-negative");
    }
    const double delay = distance_m / kSpeedOfLight;
    // Reduce f_c * t0 to its fractional number of cycles before scaling by
    // 2*pi; this keeps the phase accurate when many cycles elapse.
    const double cycles = carrier_hz * delay;
    double frac = cycles - std::floor(cycles);
    double phase = kTwoPi * frac;
    if (phase >= kTwoPi) {
        phase = 0.0;
    }
    return ChannelImpulseResponse{{ChannelTap{gain, delay, phase}}};
}

double received_power_from_s21(std::complex<double> s21, double p_tx_linear) {
    if (!(p_tx_linear > 0.0) || !std::isfinite(p_tx_linear)) {
        throw DomainError("received_power_from_s21: p_tx must be positive, got " +
                          std::to_string(p_tx_linear));
    }
    return std::norm(s21) * p_tx_linear;
}

double path_loss_rx_power_db(const LinkBudget& budget) {
    if (!(budget.exponent > 0.0) || !std::isfinite(budget.exponent)) {
        throw DomainError("path_loss_rx_power_db: exponent must be positive");
    }
    if (!(budget.distance_m > 0.0) || !std::isfinite(budget.distance_m)) {
        throw DomainError("path_loss_rx_power_db: distance must be positive");
    }
    return budget.p_tx_dbm - 10.0 * budget.exponent * std::log10(budget.distance_m) +
           budget.misalignment_db;
}

double instantaneous_snr(double p_rx_linear, double bandwidth_hz, double n0) {
    if (!(p_rx_linear >= 0.0)) {
        throw DomainError("instantaneous_snr: received power must be non-negative");
    }
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
        throw DomainError("instantaneous_snr: bandwidth must be positive");
    }
    if (!(n0 > 0.0) || !std::isfinite(n0)) {
        throw DomainError("instantaneous_snr: noise density must be positive");
    }
    return p_rx_linear / (bandwidth_hz * n0);
}

}  // namespace mixchan
