#include "hvrt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace hvrt {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

double parse_double(const std::string& value, const std::string& key) {
    double out = 0.0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto res = std::from_chars(begin, end, out);
    require(res.ec == std::errc() && res.ptr == end, Errc::schema_error,
            "key '" + key + "' needs a number, got '" + value + "'");
    return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail(Errc::schema_error, "key '" + key + "' needs true/false, got '" + value + "'");
}

std::string events_to_string(const std::vector<Event>& events) {
    if (events.empty()) return "none";
    std::string out;
    for (const Event& ev : events) {
        if (!out.empty()) out += ", ";
        switch (ev.kind) {
            case EventKind::dc_bipolar_block: out += "dc_block@" + fmt(ev.time); break;
            case EventKind::capacitor_trip:
                out += "cap_trip@" + fmt(ev.time) + ":" + fmt(ev.arg);
                break;
            case EventKind::wind_step:
                out += "wind_step@" + fmt(ev.time) + ":" + fmt(ev.arg);
                break;
        }
    }
    return out;
}

std::vector<Event> events_from_string(const std::string& value) {
    std::vector<Event> events;
    if (trim(value) == "none") return events;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto at = item.find('@');
        require(at != std::string::npos, Errc::schema_error,
                "event '" + item + "' must look like kind@time[:arg]");
        const std::string kind = item.substr(0, at);
        std::string rest = item.substr(at + 1);
        double arg = 0.0;
        const auto colon = rest.find(':');
        if (colon != std::string::npos) {
            arg = parse_double(trim(rest.substr(colon + 1)), "events");
            rest = rest.substr(0, colon);
        }
        Event ev;
        ev.time = parse_double(trim(rest), "events");
        ev.arg = arg;
        if (kind == "dc_block")
            ev.kind = EventKind::dc_bipolar_block;
        else if (kind == "cap_trip")
            ev.kind = EventKind::capacitor_trip;
        else if (kind == "wind_step")
            ev.kind = EventKind::wind_step;
        else
            fail(Errc::schema_error, "unknown event kind '" + kind + "'");
        events.push_back(ev);
    }
    return events;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(ConfigDocument&, const std::string&)> set;
    std::function<std::string(const ConfigDocument&)> get;
    bool si_electrical = false;  ///< member of the SI machine block
    bool pu_electrical = false;  ///< member of the per-unit machine block
};

#define NUM_FIELD(section_, key_, expr) \
    Field{section_, key_, \
          [](ConfigDocument& d, const std::string& v) { d.expr = parse_double(v, key_); }, \
          [](const ConfigDocument& d) { return fmt(d.expr); }, false, false}

std::vector<Field> schema() {
    std::vector<Field> f;
    f.push_back(NUM_FIELD("grid", "x_e", scenario.grid.x_e));
    f.push_back(Field{"grid", "q_c",
                      [](ConfigDocument& d, const std::string& v) {
                          d.scenario.grid.g_c = gc_from_qc(parse_double(v, "q_c"));
                      },
                      [](const ConfigDocument& d) { return fmt(d.scenario.grid.g_c); }, false,
                      false});

    auto si_field = [](const char* key, double MachineSi::* member) {
        return Field{"machine_si", key,
                     [member, key](ConfigDocument& d, const std::string& v) {
                         d.si.*member = parse_double(v, key);
                     },
                     [member](const ConfigDocument& d) { return fmt(d.si.*member); }, true,
                     false};
    };
    f.push_back(si_field("v_s_rated_v", &MachineSi::v_s_rated_v));
    f.push_back(si_field("f_base_hz", &MachineSi::f_base_hz));
    f.push_back(si_field("p_rated_mw", &MachineSi::p_rated_mw));
    f.push_back(si_field("power_factor", &MachineSi::power_factor));
    f.push_back(si_field("s_c_mva", &MachineSi::s_c_mva));
    f.push_back(si_field("x_m_ohm", &MachineSi::x_m_ohm));
    f.push_back(si_field("x_l_ohm", &MachineSi::x_l_ohm));
    f.push_back(si_field("i_r_max_a", &MachineSi::i_r_max_a));
    f.push_back(si_field("n_machines", &MachineSi::n_machines));

    auto pu_field = [](const char* key, double MachineParams::* member) {
        return Field{"machine", key,
                     [member, key](ConfigDocument& d, const std::string& v) {
                         d.scenario.machine.*member = parse_double(v, key);
                         d.machine_si_active = false;
                     },
                     [member](const ConfigDocument& d) { return fmt(d.scenario.machine.*member); },
                     false, true};
    };
    f.push_back(pu_field("x_m", &MachineParams::x_m));
    f.push_back(pu_field("x_ls", &MachineParams::x_ls));
    f.push_back(pu_field("i_r_max", &MachineParams::i_r_max));
    f.push_back(pu_field("s_n", &MachineParams::s_n));
    f.push_back(pu_field("s_c", &MachineParams::s_c));

    f.push_back(NUM_FIELD("machine", "r_s", scenario.machine.r_s));
    f.push_back(NUM_FIELD("machine", "k_de_max", scenario.machine.k_de_max));
    f.push_back(NUM_FIELD("machine", "slip", scenario.machine.slip));
    f.push_back(NUM_FIELD("machine", "q_g_cap", scenario.machine.q_g_cap));
    f.push_back(Field{"machine", "gsc_neglect_slip",
                      [](ConfigDocument& d, const std::string& v) {
                          d.scenario.machine.gsc_neglect_slip = parse_bool(v, "gsc_neglect_slip");
                      },
                      [](const ConfigDocument& d) {
                          return std::string(d.scenario.machine.gsc_neglect_slip ? "true"
                                                                                 : "false");
                      },
                      false, false});

    f.push_back(NUM_FIELD("turbine", "h", scenario.turbine.h));
    f.push_back(NUM_FIELD("turbine", "v_rate", scenario.turbine.v_rate));
    f.push_back(NUM_FIELD("turbine", "k_opt", scenario.turbine.k_opt));
    f.push_back(NUM_FIELD("turbine", "aero_scale", scenario.turbine.aero_scale));
    f.push_back(NUM_FIELD("turbine", "omega_min", scenario.turbine.omega_min));
    f.push_back(NUM_FIELD("turbine", "omega_max", scenario.turbine.omega_max));
    f.push_back(NUM_FIELD("turbine", "cut_in", scenario.turbine.cut_in));
    f.push_back(NUM_FIELD("turbine", "cut_out", scenario.turbine.cut_out));

    f.push_back(NUM_FIELD("converter", "tau_c", scenario.conv.tau_c));
    f.push_back(NUM_FIELD("converter", "c_dc", scenario.conv.c_dc));
    f.push_back(NUM_FIELD("converter", "v_dc_ref", scenario.conv.v_dc_ref));

    f.push_back(NUM_FIELD("pi", "rsc_p_kp", scenario.pi.rsc_p.kp));
    f.push_back(NUM_FIELD("pi", "rsc_p_ki", scenario.pi.rsc_p.ki));
    f.push_back(NUM_FIELD("pi", "rsc_q_kp", scenario.pi.rsc_q.kp));
    f.push_back(NUM_FIELD("pi", "rsc_q_ki", scenario.pi.rsc_q.ki));
    f.push_back(NUM_FIELD("pi", "rsc_i_kp", scenario.pi.rsc_i.kp));
    f.push_back(NUM_FIELD("pi", "rsc_i_ki", scenario.pi.rsc_i.ki));
    f.push_back(NUM_FIELD("pi", "gsc_vdc_kp", scenario.pi.gsc_vdc.kp));
    f.push_back(NUM_FIELD("pi", "gsc_vdc_ki", scenario.pi.gsc_vdc.ki));
    f.push_back(NUM_FIELD("pi", "gsc_q_kp", scenario.pi.gsc_q.kp));
    f.push_back(NUM_FIELD("pi", "gsc_q_ki", scenario.pi.gsc_q.ki));
    f.push_back(NUM_FIELD("pi", "gsc_i_kp", scenario.pi.gsc_i.kp));
    f.push_back(NUM_FIELD("pi", "gsc_i_ki", scenario.pi.gsc_i.ki));

    f.push_back(NUM_FIELD("hvrt", "v_ov_min", scenario.hvrt.v_ov_min));
    f.push_back(NUM_FIELD("hvrt", "v_ov1", scenario.hvrt.v_ov1));
    f.push_back(NUM_FIELD("hvrt", "v_ov_max", scenario.hvrt.v_ov_max));
    f.push_back(Field{"hvrt", "gain_basis",
                      [](ConfigDocument& d, const std::string& v) {
                          if (v == "total")
                              d.scenario.hvrt.gain_basis = GainBasis::total;
                          else if (v == "stator")
                              d.scenario.hvrt.gain_basis = GainBasis::stator;
                          else
                              fail(Errc::schema_error, "gain_basis must be total or stator");
                      },
                      [](const ConfigDocument& d) {
                          return std::string(d.scenario.hvrt.gain_basis == GainBasis::total
                                                 ? "total"
                                                 : "stator");
                      },
                      false, false});
    f.push_back(NUM_FIELD("hvrt", "hysteresis", scenario.hvrt.hysteresis));
    f.push_back(NUM_FIELD("hvrt", "release_rate", scenario.hvrt.release_rate));

    f.push_back(NUM_FIELD("avc", "kp", scenario.avc.kp));
    f.push_back(NUM_FIELD("avc", "ki", scenario.avc.ki));
    f.push_back(NUM_FIELD("avc", "setpoint", scenario.avc.setpoint));

    f.push_back(Field{"scenario", "method",
                      [](ConfigDocument& d, const std::string& v) {
                          if (v == "unitpf")
                              d.scenario.method = Method::unit_pf;
                          else if (v == "avc")
                              d.scenario.method = Method::avc;
                          else if (v == "pq")
                              d.scenario.method = Method::pq_coordination;
                          else
                              fail(Errc::schema_error, "method must be unitpf, avc or pq");
                      },
                      [](const ConfigDocument& d) {
                          return std::string(method_name(d.scenario.method));
                      },
                      false, false});
    f.push_back(NUM_FIELD("scenario", "v_wind", scenario.v_wind));
    f.push_back(NUM_FIELD("scenario", "dt", scenario.dt));
    f.push_back(NUM_FIELD("scenario", "t_end", scenario.t_end));
    f.push_back(Field{"scenario", "events",
                      [](ConfigDocument& d, const std::string& v) {
                          d.scenario.events = events_from_string(v);
                      },
                      [](const ConfigDocument& d) { return events_to_string(d.scenario.events); },
                      false, false});
    f.push_back(Field{"scenario", "dc_p",
                      [](ConfigDocument& d, const std::string& v) {
                          d.scenario.dc.p = v == "auto" ? -1.0 : parse_double(v, "dc_p");
                      },
                      [](const ConfigDocument& d) {
                          return d.scenario.dc.p < 0.0 ? std::string("auto")
                                                       : fmt(d.scenario.dc.p);
                      },
                      false, false});
    f.push_back(NUM_FIELD("scenario", "dc_q_ratio", scenario.dc.q_ratio));
    return f;
}

#undef NUM_FIELD

const std::vector<Field>& schema_fields() {
    static const std::vector<Field> fields = schema();
    return fields;
}

const Field* find_field(const std::string& section, const std::string& key) {
    for (const Field& f : schema_fields())
        if (f.section == section && f.key == key) return &f;
    return nullptr;
}

}  // namespace

ConfigDocument default_config() {
    ConfigDocument doc;
    doc.scenario.machine = table1_machine();
    for (const Field& f : schema_fields())
        doc.provenance[f.section + "." + f.key] = Provenance::defaulted;
    return doc;
}

void finalize(ConfigDocument& doc) {
    if (doc.machine_si_active) {
        const MachineParams converted = machine_from_si(doc.si);
        MachineParams& m = doc.scenario.machine;
        m.x_m = converted.x_m;
        m.x_ls = converted.x_ls;
        m.x_l = converted.x_l;
        m.i_r_max = converted.i_r_max;
        m.s_n = converted.s_n;
        m.s_c = converted.s_c;
    } else {
        MachineParams& m = doc.scenario.machine;
        m.x_l = m.x_ls + m.x_m;
    }
    doc.scenario.validate();
}

ConfigDocument parse_config(const std::string& text) {
    ConfigDocument doc = default_config();
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int line_no = 0;
    bool saw_si = false, saw_pu = false;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', Errc::parse_error,
                    "line " + std::to_string(line_no) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const Field& f : schema_fields()) known = known || f.section == section;
            require(known, Errc::schema_error,
                    "line " + std::to_string(line_no) + ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos, Errc::parse_error,
                "line " + std::to_string(line_no) + ": expected key = value");
        require(!section.empty(), Errc::parse_error,
                "line " + std::to_string(line_no) + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const Field* f = find_field(section, key);
        require(f != nullptr, Errc::schema_error,
                "line " + std::to_string(line_no) + ": unknown key '" + section + "." + key +
                    "'");
        try {
            f->set(doc, value);
        } catch (const SimError& e) {
            if (e.code() == Errc::schema_error) throw;
            fail(Errc::schema_error,
                 "line " + std::to_string(line_no) + ": " + e.what());
        }
        saw_si = saw_si || f->si_electrical;
        saw_pu = saw_pu || f->pu_electrical;
        doc.provenance[section + "." + key] = Provenance::file;
    }
    require(!(saw_si && saw_pu), Errc::schema_error,
            "SI and per-unit machine blocks are mutually exclusive");
    finalize(doc);
    return doc;
}

ConfigDocument load_config_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::parse_error, "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_override(ConfigDocument& doc, const std::string& dotted, const std::string& value) {
    const auto dot = dotted.find('.');
    require(dot != std::string::npos, Errc::schema_error,
            "override '" + dotted + "' must look like section.key");
    const std::string section = dotted.substr(0, dot);
    const std::string key = dotted.substr(dot + 1);
    const Field* f = find_field(section, key);
    require(f != nullptr, Errc::schema_error, "unknown key '" + dotted + "'");
    f->set(doc, value);
    doc.provenance[dotted] = Provenance::flag;
}

std::string serialize(const ConfigDocument& doc) {
    std::string out;
    std::string section;
    for (const Field& f : schema_fields()) {
        // keep the exclusive machine blocks exclusive on round-trip
        if (f.si_electrical && !doc.machine_si_active) continue;
        if (f.pu_electrical && doc.machine_si_active) continue;
        if (f.section != section) {
            if (!out.empty()) out += "\n";
            out += "[" + f.section + "]\n";
            section = f.section;
        }
        out += f.key + " = " + f.get(doc) + "\n";
    }
    return out;
}

uint64_t fnv1a_hash(std::string_view data) {
    uint64_t h = 14695981039346656037ull;
    for (const char ch : data) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ull;
    }
    return h;
}

std::string manifest_text(const ConfigDocument& doc) {
    const std::string body = serialize(doc);
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(body)));
    std::string out;
    out += "# hvrtsim run manifest\n";
    out += "# version = ";
    out += kToolVersion;
    out += "\n# input_hash = ";
    out += hash;
    out += "\n";
    out += body;
    return out;
}

}  // namespace hvrt
