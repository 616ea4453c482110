#include "hvrt/csv.hpp"

#include <cstdio>

namespace hvrt {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_timeseries_csv(const TimeSeries& ts, std::ostream& os) {
    os << "t,v_p,p_dfig,q_dfig,omega_r,v_dc,i_r,v_r,mode,q_s_ref,q_g_ref,p_s_ref,k_de\n";
    for (size_t i = 0; i < ts.size(); ++i) {
        os << format_number(ts.t[i]) << ',' << format_number(ts.v_p[i]) << ','
           << format_number(ts.p_dfig[i]) << ',' << format_number(ts.q_dfig[i]) << ','
           << format_number(ts.omega_r[i]) << ',' << format_number(ts.v_dc[i]) << ','
           << format_number(ts.i_r[i]) << ',' << format_number(ts.v_r[i]) << ','
           << mode_name(ts.mode[i]) << ',' << format_number(ts.q_s_ref[i]) << ','
           << format_number(ts.q_g_ref[i]) << ',' << format_number(ts.p_s_ref[i]) << ','
           << format_number(ts.k_de[i]) << '\n';
    }
}

void write_capability_csv(const std::vector<CapabilityRow>& rows, std::ostream& os) {
    os << "p_s,v_s,k_de,q_s1_max,q_s2_max,q_s_max,q_g_max,q_total_max\n";
    for (const CapabilityRow& r : rows) {
        os << format_number(r.p_s) << ',' << format_number(r.v_s) << ','
           << format_number(r.k_de) << ',' << format_number(r.limits.q_s1_max) << ','
           << format_number(r.limits.q_s2_max) << ',' << format_number(r.limits.q_s_max) << ','
           << format_number(r.limits.q_g_max) << ',' << format_number(r.limits.q_total_max)
           << '\n';
    }
}

void write_metrics_csv(const std::vector<RunMetrics>& metrics, std::ostream& os) {
    os << "label,peak_v_p,settled_v_p,time_to_band,peak_i_r,q_absorbed\n";
    for (const RunMetrics& m : metrics) {
        os << m.label << ',' << format_number(m.peak_v_p) << ',' << format_number(m.settled_v_p)
           << ',' << format_number(m.time_to_band) << ',' << format_number(m.peak_i_r) << ','
           << format_number(m.q_absorbed) << '\n';
    }
}

}  // namespace hvrt
