#include "aslsim/energy.hpp"

#include <stdexcept>

namespace aslsim {

EnergyLedger& EnergyLedger::operator+=(const EnergyLedger& other) {
    cpu_s += other.cpu_s;
    lpm_s += other.lpm_s;
    deep_lpm_s += other.deep_lpm_s;
    tx_s += other.tx_s;
    rx_receive_s += other.rx_receive_s;
    rx_idle_s += other.rx_idle_s;
    elapsed_s += other.elapsed_s;
    return *this;
}

PowerBreakdown average_power(const EnergyLedger& ledger, const PlatformCurrents& currents) {
    if (ledger.elapsed_s <= 0.0) throw std::invalid_argument("ledger has zero elapsed time");
    const double v = currents.supply_v;
    const double inv = 1.0 / ledger.elapsed_s;
    PowerBreakdown p;
    p.cpu_mw = ledger.cpu_s * inv * currents.cpu_ma * v;
    p.lpm_mw = ledger.lpm_s * inv * currents.lpm_ma * v;
    p.deep_lpm_mw = ledger.deep_lpm_s * inv * currents.deep_lpm_ma * v;
    p.tx_mw = ledger.tx_s * inv * currents.tx_ma * v;
    p.rx_receive_mw = ledger.rx_receive_s * inv * currents.rx_ma * v;
    p.rx_idle_mw = ledger.rx_idle_s * inv * currents.rx_ma * v;
    p.total_mw = p.cpu_mw + p.lpm_mw + p.deep_lpm_mw + p.tx_mw + p.rx_receive_mw + p.rx_idle_mw;
    return p;
}

double radio_duty_cycle(const EnergyLedger& ledger) {
    if (ledger.elapsed_s <= 0.0) throw std::invalid_argument("ledger has zero elapsed time");
    return (ledger.tx_s + ledger.rx_receive_s + ledger.rx_idle_s) / ledger.elapsed_s;
}

double lifetime_days(double power_mw, double battery_joules) {
    if (power_mw <= 0.0) throw std::invalid_argument("power must be positive");
    return battery_joules / (power_mw * 1e-3 * 86400.0);
}

}  // namespace aslsim
