#pragma once

#include <array>
#include <string>

namespace aslsim {

// Energest-style per-state time accounting, seconds.
struct EnergyLedger {
    double cpu_s = 0.0;
    double lpm_s = 0.0;
    double deep_lpm_s = 0.0;
    double tx_s = 0.0;
    double rx_receive_s = 0.0;
    double rx_idle_s = 0.0;
    double elapsed_s = 0.0;

    EnergyLedger& operator+=(const EnergyLedger& other);
    friend EnergyLedger operator+(EnergyLedger a, const EnergyLedger& b) { return a += b; }
};

// Current draw per state in mA and the supply voltage.
struct PlatformCurrents {
    double cpu_ma = 14.0;
    double lpm_ma = 0.014;
    double deep_lpm_ma = 0.002;
    double tx_ma = 11.6;
    double rx_ma = 12.3;  // receive and idle listening both draw Rx current
    double supply_v = 3.3;
};

// Average power in mW with per-state components. Components always sum to
// the total; receiving and idle listening are reported separately even
// though they share the Rx current.
struct PowerBreakdown {
    double cpu_mw = 0.0;
    double lpm_mw = 0.0;
    double deep_lpm_mw = 0.0;
    double tx_mw = 0.0;
    double rx_receive_mw = 0.0;
    double rx_idle_mw = 0.0;
    double total_mw = 0.0;
};

PowerBreakdown average_power(const EnergyLedger& ledger, const PlatformCurrents& currents);

// (TX + RX_receive + RX_idle) / elapsed.
double radio_duty_cycle(const EnergyLedger& ledger);

// L = E_batt / (P_avg * 86400); power in mW, battery in joules.
double lifetime_days(double power_mw, double battery_joules);

inline constexpr double kCoinCellJoules = 2376.0;  // 3 V * 220 mAh * 3.6

}  // namespace aslsim
