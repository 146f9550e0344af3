#include "bnmimo/app.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bnmimo/errors.hpp"

namespace bnmimo::app {

namespace {

using ojson = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v, const char* spec) {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(d))
        throw ValidationError("config: '" + key + "' expects a finite number, got '" + v + "'");
    return d;
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    if (d < 0.0 || d != std::floor(d) || d > 9.0e18)
        throw ValidationError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
    if (v.find_first_of(".eE") == std::string::npos) return std::stoull(v);
    return static_cast<std::uint64_t>(d);
}

int parse_int(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ValidationError("config: '" + key + "' expects an integer, got '" + v + "'");
    return static_cast<int>(d);
}

bool parse_bool(const std::string& key, const std::string& v) {
    const std::string l = lower(v);
    if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
    if (l == "false" || l == "0" || l == "no" || l == "off") return false;
    throw ValidationError("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> parse_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = lower(trim(item));
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

std::string file_label(std::string name) {
    for (char& c : name) {
        if (c == '+') c = '-';
        else if (c == '/') c = '_';
    }
    return name;
}

// Regions of the grid on which one of `values` is largest; boundaries are
// interpolated between the outgoing and incoming leader.
std::vector<NamedRegion> leader_regions(const std::vector<double>& grid, const std::vector<std::string>& names,
                                        const std::vector<std::vector<double>>& values) {
    std::vector<NamedRegion> out;
    if (names.empty() || grid.empty()) return out;
    const auto leader = [&](std::size_t p) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < names.size(); ++j)
            if (values[j][p] > values[best][p]) best = j;
        return best;
    };
    std::size_t cur = leader(0);
    double from = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 1; p < grid.size(); ++p) {
        const std::size_t next = leader(p);
        if (next == cur) continue;
        const double d0 = values[cur][p - 1] - values[next][p - 1];
        const double d1 = values[cur][p] - values[next][p];
        const double t = d0 == d1 ? 0.5 : std::clamp(d0 / (d0 - d1), 0.0, 1.0);
        const double x = grid[p - 1] + t * (grid[p] - grid[p - 1]);
        out.push_back({names[cur], from, x});
        from = x;
        cur = next;
    }
    out.push_back({names[cur], from, std::numeric_limits<double>::infinity()});
    return out;
}

ojson db_or_null(double v) { return std::isinf(v) ? ojson(nullptr) : ojson(v); }

} // namespace

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::set(const std::string& key_in, const std::string& value_in) {
    const std::string key = lower(trim(key_in));
    const std::string v = trim(value_in);
    if (key == "kind") {
        const std::string k = lower(v);
        if (k != "capacity" && k != "ber") throw ValidationError("config: 'kind' must be capacity or ber, got '" + v + "'");
        kind = k;
    } else if (key == "preset") preset = v;
    else if (key == "compare") compare = parse_bool(key, v);
    else if (key == "nt") nt = parse_int(key, v);
    else if (key == "nr") nr = parse_int(key, v);
    else if (key == "schemes") {
        std::vector<std::string> names;
        for (const auto& s : parse_list(v)) names.push_back(schemes::SchemeSpec::parse(s).name());
        schemes = names;
    } else if (key == "systems") {
        std::vector<std::string> names;
        for (const auto& s : parse_list(v)) names.push_back(link::SystemSpec::parse(s).name());
        systems = names;
    } else if (key == "rate") rate = parse_int(key, v);
    else if (key == "constellation") constellation = v.empty() ? std::string() : modem::Constellation::parse(v).name();
    else if (key == "snr_start_db") snr_start_db = parse_double(key, v);
    else if (key == "snr_stop_db") snr_stop_db = parse_double(key, v);
    else if (key == "snr_step_db") snr_step_db = parse_double(key, v);
    else if (key == "trials") trials = parse_count(key, v);
    else if (key == "min_errors") min_errors = parse_count(key, v);
    else if (key == "max_bits") max_bits = parse_count(key, v);
    else if (key == "blocks_per_trial") blocks_per_trial = parse_int(key, v);
    else if (key == "batch_trials") batch_trials = parse_count(key, v);
    else if (key == "analytic") analytic = parse_bool(key, v);
    else if (key == "independent_streams") independent_streams = parse_bool(key, v);
    else if (key == "seed") seed = parse_count(key, v);
    else if (key == "workers") workers = parse_int(key, v);
    else throw ValidationError("config: unknown key '" + key_in + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
    return {
        {"kind", kind},
        {"preset", preset},
        {"compare", compare ? "true" : "false"},
        {"nt", std::to_string(nt)},
        {"nr", std::to_string(nr)},
        {"schemes", join(schemes)},
        {"systems", join(systems)},
        {"rate", std::to_string(rate)},
        {"constellation", constellation},
        {"snr_start_db", fmt(snr_start_db)},
        {"snr_stop_db", fmt(snr_stop_db)},
        {"snr_step_db", fmt(snr_step_db)},
        {"trials", std::to_string(trials)},
        {"min_errors", std::to_string(min_errors)},
        {"max_bits", std::to_string(max_bits)},
        {"blocks_per_trial", std::to_string(blocks_per_trial)},
        {"batch_trials", std::to_string(batch_trials)},
        {"analytic", analytic ? "true" : "false"},
        {"independent_streams", independent_streams ? "true" : "false"},
        {"seed", std::to_string(seed)},
    };
}

std::string RunConfig::to_text() const {
    std::string s;
    for (const auto& [k, v] : entries()) s += k + "=" + v + "\n";
    return s;
}

std::vector<double> RunConfig::grid() const { return sim::db_grid(snr_start_db, snr_stop_db, snr_step_db); }

void RunConfig::validate() const {
    if (kind != "capacity" && kind != "ber") throw ValidationError("config: 'kind' must be capacity or ber");
    channel::ChannelConfig{nt, nr, seed}.validate();
    (void)grid();
    sim::Execution{workers, static_cast<std::size_t>(batch_trials)}.validate();
    if (kind == "capacity") {
        if (schemes.empty()) throw ValidationError("config: capacity runs need at least one scheme");
        for (const auto& s : schemes) schemes::SchemeSpec::parse(s).validate(nt);
        if (trials < 100) throw ValidationError("config: capacity runs need trials >= 100");
        return;
    }
    if (systems.empty()) throw ValidationError("config: BER runs need at least one system");
    if (rate > 0 && !constellation.empty())
        throw ValidationError("config: set either 'rate' or 'constellation', not both");
    if (rate <= 0 && constellation.empty()) throw ValidationError("config: BER runs need a positive 'rate' or a 'constellation'");
    for (const auto& s : systems) {
        const auto spec = link::SystemSpec::parse(s);
        if (rate > 0) (void)link::resolve(spec, nt, nr, rate);
        else (void)link::resolve(spec, nt, nr, modem::Constellation::parse(constellation));
    }
    sim::StoppingRule{min_errors, max_bits}.validate();
    if (blocks_per_trial < 1 || blocks_per_trial > 100000) throw ValidationError("config: blocks_per_trial must be in [1, 100000]");
    if (analytic && trials < 1) throw ValidationError("config: analytic BER needs trials >= 1");
}

// ---------------------------------------------------------------------------
// Config loading

void load_config_text(RunConfig& cfg, const std::string& text) {
    const std::string t = trim(text);
    if (!t.empty() && t.front() == '{') {
        ojson j;
        try {
            j = ojson::parse(t);
        } catch (const std::exception& e) {
            throw ValidationError(std::string("config: malformed JSON: ") + e.what());
        }
        if (!j.contains("config") || !j["config"].is_object()) throw ValidationError("config: JSON input has no \"config\" object");
        for (const auto& [k, v] : j["config"].items()) {
            if (!v.is_string()) throw ValidationError("config: JSON value for '" + k + "' must be a string");
            cfg.set(k, v.get<std::string>());
        }
        return;
    }

    const bool output_file = text.find("#config ") != std::string::npos;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::string l = trim(line);
        if (l.rfind("#config ", 0) == 0) l = trim(l.substr(8));
        else if (l.empty() || l.front() == '#' || output_file) continue;
        const auto eq = l.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: line " + std::to_string(lineno) + " is not key=value: '" + l + "'");
        cfg.set(l.substr(0, eq), l.substr(eq + 1));
    }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    load_config_text(cfg, ss.str());
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct Preset {
    std::string description;
    std::vector<std::pair<std::string, std::string>> keys;
};

std::vector<std::pair<std::string, std::string>> capacity_keys(const std::string& schemes, double start, double stop) {
    return {{"kind", "capacity"}, {"nt", "5"},        {"nr", "5"},           {"schemes", schemes},
            {"systems", ""},      {"rate", "0"},      {"constellation", ""}, {"snr_start_db", fmt(start)},
            {"snr_stop_db", fmt(stop)}, {"snr_step_db", "0.5"}, {"trials", "20000"}, {"analytic", "false"}};
}

std::vector<std::pair<std::string, std::string>> ber_keys(int n, const std::string& systems, int rate, double stop,
                                                          double step, const std::string& max_bits,
                                                          bool analytic = false) {
    return {{"kind", "ber"},
            {"nt", std::to_string(n)},
            {"nr", std::to_string(n)},
            {"schemes", ""},
            {"systems", systems},
            {"rate", std::to_string(rate)},
            {"constellation", ""},
            {"snr_start_db", "0"},
            {"snr_stop_db", fmt(stop)},
            {"snr_step_db", fmt(step)},
            {"trials", analytic ? "100000" : "10000"},
            {"min_errors", "200"},
            {"max_bits", max_bits},
            {"blocks_per_trial", "8"},
            {"analytic", analytic ? "true" : "false"}};
}

const std::map<std::string, Preset>& presets() {
    static const std::map<std::string, Preset> table = {
        {"fig2", {"5x5 capacity of EQ, WF, BF and BN, -10..25 dB", capacity_keys("eq,wf,bf,bn", -10, 25)}},
        {"fig3a", {"3x3 BN with 8PSK (R=6), MMSE, simulated and analytic BER", ber_keys(3, "bn", 6, 20, 2, "20000000", true)}},
        {"fig3b", {"4x4 BN with QPSK (R=6), MMSE, simulated and analytic BER", ber_keys(4, "bn", 6, 20, 2, "20000000", true)}},
        {"fig4a", {"4x4 R=3: BF (8PSK) vs BN (BPSK) with MMSE and ML", ber_keys(4, "bf,bn,bn/ml", 3, 15, 3, "10000000")}},
        {"fig4b", {"4x4 R=6: BF (64QAM) vs BN (QPSK) with MMSE and ML", ber_keys(4, "bf,bn,bn/ml", 6, 18, 3, "10000000")}},
        {"fig5a", {"4x4 R=3: BF, BN (MMSE, ML) and BN+LDC (MMSE)", ber_keys(4, "bf,bn,bn/ml,bn+ldc", 3, 15, 3, "10000000")}},
        {"fig5b", {"4x4 R=6: BF, BN (MMSE, ML) and BN+LDC (MMSE)", ber_keys(4, "bf,bn,bn/ml,bn+ldc", 6, 18, 3, "10000000")}},
        {"fig6", {"5x5 capacity of 1D and 2D BN with EQ and WF, -10..25 dB", capacity_keys("eq,wf,bn,mdbn2", -10, 25)}},
        {"fig7", {"5x5 capacity of 1D/2D BF and BN with EQ and WF, -15..30 dB",
                  capacity_keys("eq,wf,bf,mdbf2,mdbn2,bn", -15, 30)}},
        {"fig8", {"5x5 R=2: 2D BF with LDC (MMSE) vs STBC (matched filter)",
                  ber_keys(5, "mdbf2+ldc,mdbf2+stbc", 2, 15, 3, "10000000")}},
        {"fig9", {"5x5 R=3: 2D BN with LDC (MMSE) vs STBC (matched filter)",
                  ber_keys(5, "mdbn2+ldc,mdbn2+stbc", 3, 15, 3, "10000000")}},
        {"fig10", {"5x5 R=6: 2D BF and 2D BN, each with LDC and STBC",
                   ber_keys(5, "mdbf2+ldc,mdbf2+stbc,mdbn2+ldc,mdbn2+stbc", 6, 21, 3, "10000000")}},
        {"bf", {"4x4 BF (MRC), R=6", ber_keys(4, "bf", 6, 18, 3, "10000000")}},
        {"bn", {"4x4 BN with MMSE, R=6", ber_keys(4, "bn", 6, 18, 3, "10000000")}},
        {"bn-ml", {"4x4 BN with ML, R=6", ber_keys(4, "bn/ml", 6, 18, 3, "10000000")}},
        {"bn-ldc", {"4x4 BN+LDC with MMSE, R=6", ber_keys(4, "bn+ldc", 6, 18, 3, "10000000")}},
        {"md-bf-ldc", {"5x5 2D BF+LDC with MMSE, R=6", ber_keys(5, "mdbf2+ldc", 6, 21, 3, "10000000")}},
        {"md-bf-stbc", {"5x5 2D BF+STBC with matched filter, R=6", ber_keys(5, "mdbf2+stbc", 6, 21, 3, "10000000")}},
        {"md-bn-ldc", {"5x5 2D BN+LDC with MMSE, R=6", ber_keys(5, "mdbn2+ldc", 6, 21, 3, "10000000")}},
        {"md-bn-stbc", {"5x5 2D BN+STBC with matched filter, R=6", ber_keys(5, "mdbn2+stbc", 6, 21, 3, "10000000")}},
    };
    return table;
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [k, _] : presets()) out.push_back(k);
    std::sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
        // fig2 < fig3a < ... < fig10, then the system presets
        const bool fa = a.rfind("fig", 0) == 0, fb = b.rfind("fig", 0) == 0;
        if (fa != fb) return fa;
        if (fa) {
            const int na = std::stoi(a.substr(3)), nb = std::stoi(b.substr(3));
            if (na != nb) return na < nb;
        }
        return a < b;
    });
    return out;
}

std::string preset_description(const std::string& name) {
    const auto it = presets().find(lower(name));
    if (it == presets().end()) throw ValidationError("unknown preset '" + name + "'");
    return it->second.description;
}

void apply_preset(RunConfig& cfg, const std::string& name) {
    const auto it = presets().find(lower(name));
    if (it == presets().end()) throw ValidationError("unknown preset '" + name + "'");
    for (const auto& [k, v] : it->second.keys) cfg.set(k, v);
    cfg.preset = it->first;
}

// ---------------------------------------------------------------------------
// Execution

RunResult execute(const RunConfig& cfg) {
    cfg.validate();
    RunResult r;
    r.config = cfg;
    const std::vector<double> grid = cfg.grid();
    const channel::ChannelConfig chan{cfg.nt, cfg.nr, cfg.seed};
    const sim::Execution exec{cfg.workers, static_cast<std::size_t>(cfg.batch_trials)};

    if (cfg.kind == "capacity") {
        sim::CapacityRequest req;
        req.channel = chan;
        for (const auto& s : cfg.schemes) req.schemes.push_back(schemes::SchemeSpec::parse(s));
        req.rho_db = grid;
        req.trials = static_cast<std::size_t>(cfg.trials);
        req.independent_streams = cfg.independent_streams;
        r.capacity = sim::estimate_capacity(req, exec);

        if (cfg.compare) {
            const auto& curves = r.capacity->curves;
            for (std::size_t a = 0; a < curves.size(); ++a)
                for (std::size_t b = a + 1; b < curves.size(); ++b) {
                    std::vector<double> d(grid.size());
                    for (std::size_t p = 0; p < grid.size(); ++p) d[p] = curves[a].mean_bits[p] - curves[b].mean_bits[p];
                    for (const auto& c : sim::detect_crossover(grid, d, r.capacity->pair_stderr[a][b]).crossings)
                        r.crossings.push_back({curves[a].scheme.name(), curves[b].scheme.name(), c});
                }
            // Water-filling is the upper bound everywhere, so regions are taken
            // over the remaining schemes.
            std::vector<std::size_t> cand;
            for (std::size_t i = 0; i < curves.size(); ++i)
                if (curves[i].scheme.kind != schemes::SchemeKind::water_filling) cand.push_back(i);
            if (!cand.empty())
                for (const auto& g : sim::best_regions(*r.capacity, cand))
                    r.regions.push_back({curves[cand[g.curve]].scheme.name(), g.from_db, g.to_db});
        }
        return r;
    }

    sim::BerRequest req;
    req.channel = chan;
    req.rho_db = grid;
    req.stopping = {cfg.min_errors, cfg.max_bits};
    req.blocks_per_trial = cfg.blocks_per_trial;
    req.independent_streams = cfg.independent_streams;
    for (const auto& name : cfg.systems) {
        const auto spec = link::SystemSpec::parse(name);
        const link::ResolvedSystem sys = cfg.rate > 0 ? link::resolve(spec, cfg.nt, cfg.nr, cfg.rate)
                                                      : link::resolve(spec, cfg.nt, cfg.nr, modem::Constellation::parse(cfg.constellation));
        r.ber.push_back(sim::simulate_ber(sys, req, exec));
        if (cfg.analytic && spec.receiver != link::ReceiverKind::ml)
            r.analytic.push_back(sim::ber_average_analytic(sys, chan, grid, static_cast<std::size_t>(cfg.trials), exec,
                                                           cfg.independent_streams));
    }
    if (cfg.compare) {
        std::vector<std::string> names;
        std::vector<std::vector<double>> score;
        for (std::size_t a = 0; a < r.ber.size(); ++a) {
            names.push_back(r.ber[a].system);
            std::vector<double> s;
            for (const auto& p : r.ber[a].points) s.push_back(-p.ber);
            score.push_back(s);
            for (std::size_t b = a + 1; b < r.ber.size(); ++b) {
                std::vector<double> d(grid.size()), se(grid.size());
                for (std::size_t p = 0; p < grid.size(); ++p) {
                    d[p] = r.ber[a].points[p].ber - r.ber[b].points[p].ber;
                    se[p] = std::hypot(r.ber[a].points[p].stderr_ber, r.ber[b].points[p].stderr_ber);
                }
                for (const auto& c : sim::detect_crossover(grid, d, se).crossings)
                    r.crossings.push_back({r.ber[a].system, r.ber[b].system, c});
            }
        }
        r.regions = leader_regions(grid, names, score);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string config_comment_block(const RunConfig& cfg) {
    std::string s = "#bnmimo result\n";
    for (const auto& [k, v] : cfg.entries()) s += "#config " + k + "=" + v + "\n";
    return s;
}

ojson config_json(const RunConfig& cfg) {
    ojson c = ojson::object();
    for (const auto& [k, v] : cfg.entries()) c[k] = v;
    return c;
}

std::string analytic_csv(const RunResult& r) {
    std::string s = config_comment_block(r.config);
    s += "rho_db,system,ber,stderr,trials\n";
    for (const auto& c : r.analytic)
        for (const auto& p : c.points)
            s += fmt(p.rho_db) + "," + c.system + "," + fmt(p.ber) + "," + fmt(p.stderr_ber) + "," + std::to_string(c.trials) + "\n";
    return s;
}

std::string crossings_csv(const RunResult& r) {
    std::string s = config_comment_block(r.config);
    s += "first,second,rho_db,low_confidence\n";
    for (const auto& c : r.crossings)
        s += c.a + "," + c.b + "," + fmt(c.crossing.rho_db) + "," + (c.crossing.low_confidence ? "true" : "false") + "\n";
    return s;
}

std::string regions_csv(const RunResult& r) {
    std::string s = config_comment_block(r.config);
    s += "best,from_db,to_db\n";
    for (const auto& g : r.regions) s += g.name + "," + fmt(g.from_db) + "," + fmt(g.to_db) + "\n";
    return s;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing '" + path + "'");
}

} // namespace

std::string render_csv(const RunResult& r) {
    std::string s = config_comment_block(r.config);
    if (r.capacity) {
        s += "rho_db,scheme,mean_bits,stderr,trials\n";
        for (const auto& c : r.capacity->curves)
            for (std::size_t p = 0; p < c.rho_db.size(); ++p)
                s += fmt(c.rho_db[p]) + "," + c.scheme.name() + "," + fmt(c.mean_bits[p]) + "," + fmt(c.stderr_bits[p]) + "," +
                     std::to_string(c.trials) + "\n";
        return s;
    }
    s += "rho_db,system,ber,errors,bits\n";
    std::string capped;
    for (const auto& c : r.ber)
        for (const auto& p : c.points) {
            s += fmt(p.rho_db) + "," + c.system + "," + fmt(p.ber) + "," + std::to_string(p.errors) + "," + std::to_string(p.bits) + "\n";
            if (p.capped) capped += "#capped system=" + c.system + " rho_db=" + fmt(p.rho_db) + "\n";
        }
    return s + capped;
}

std::string render_json(const RunResult& r) {
    ojson j;
    j["format"] = "bnmimo-result";
    j["version"] = 1;
    j["config"] = config_json(r.config);
    if (r.capacity) {
        ojson curves = ojson::array();
        for (const auto& c : r.capacity->curves) {
            ojson pts = ojson::array();
            for (std::size_t p = 0; p < c.rho_db.size(); ++p)
                pts.push_back({{"rho_db", c.rho_db[p]},
                               {"mean_bits", c.mean_bits[p]},
                               {"stderr", c.stderr_bits[p]},
                               {"mean_slope_nats", c.mean_slope[p]}});
            curves.push_back({{"scheme", c.scheme.name()}, {"trials", c.trials}, {"master_seed", c.master_seed}, {"points", pts}});
        }
        j["capacity"] = curves;
    } else {
        ojson curves = ojson::array();
        for (const auto& c : r.ber) {
            ojson pts = ojson::array();
            for (const auto& p : c.points)
                pts.push_back({{"rho_db", p.rho_db},
                               {"ber", p.ber},
                               {"stderr", p.stderr_ber},
                               {"errors", p.errors},
                               {"bits", p.bits},
                               {"trials", p.trials},
                               {"capped", p.capped}});
            curves.push_back({{"system", c.system},
                              {"constellation", c.constellation},
                              {"rate", c.rate},
                              {"master_seed", c.master_seed},
                              {"points", pts}});
        }
        j["ber"] = curves;
        if (!r.analytic.empty()) {
            ojson an = ojson::array();
            for (const auto& c : r.analytic) {
                ojson pts = ojson::array();
                for (const auto& p : c.points) pts.push_back({{"rho_db", p.rho_db}, {"ber", p.ber}, {"stderr", p.stderr_ber}});
                an.push_back({{"system", c.system},
                              {"constellation", c.constellation},
                              {"trials", c.trials},
                              {"master_seed", c.master_seed},
                              {"points", pts}});
            }
            j["analytic"] = an;
        }
    }
    if (r.config.compare) {
        ojson cr = ojson::array();
        for (const auto& c : r.crossings)
            cr.push_back({{"first", c.a}, {"second", c.b}, {"rho_db", c.crossing.rho_db}, {"low_confidence", c.crossing.low_confidence}});
        ojson rg = ojson::array();
        for (const auto& g : r.regions) rg.push_back({{"best", g.name}, {"from_db", db_or_null(g.from_db)}, {"to_db", db_or_null(g.to_db)}});
        j["crossings"] = cr;
        j["regions"] = rg;
    }
    return j.dump(2) + "\n";
}

std::vector<std::string> write_outputs(const RunResult& r, const std::string& path, const std::string& format_in) {
    const std::string format = lower(format_in);
    if (format != "csv" && format != "json") throw ValidationError("output format must be csv or json, got '" + format_in + "'");
    if (path.empty()) throw ValidationError("output path is empty");
    const std::string ext = "." + format;
    std::string stem = path;
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) stem = path.substr(0, dot);
    const auto render = [&](const RunResult& x) { return format == "csv" ? render_csv(x) : render_json(x); };

    std::vector<std::string> written;
    write_file(path, render(r));
    written.push_back(path);

    RunResult one;
    one.config = r.config;
    one.config.compare = false;
    if (r.capacity) {
        for (const auto& c : r.capacity->curves) {
            sim::CapacityResult single;
            single.curves = {c};
            one.capacity = single;
            const std::string p = stem + "." + file_label(c.scheme.name()) + ext;
            write_file(p, render(one));
            written.push_back(p);
        }
    } else {
        for (const auto& c : r.ber) {
            one.ber = {c};
            one.analytic.clear();
            for (const auto& a : r.analytic)
                if (a.system == c.system) one.analytic.push_back(a);
            const std::string p = stem + "." + file_label(c.system) + ext;
            write_file(p, render(one));
            written.push_back(p);
        }
        if (format == "csv" && !r.analytic.empty()) {
            write_file(stem + ".analytic.csv", analytic_csv(r));
            written.push_back(stem + ".analytic.csv");
        }
    }
    if (format == "csv" && r.config.compare) {
        write_file(stem + ".crossings.csv", crossings_csv(r));
        write_file(stem + ".regions.csv", regions_csv(r));
        written.push_back(stem + ".crossings.csv");
        written.push_back(stem + ".regions.csv");
    }
    return written;
}

std::string summary(const RunResult& r) {
    std::ostringstream s;
    const auto grid = r.config.grid();
    if (r.capacity) {
        s << "capacity " << r.config.nt << "x" << r.config.nr << ", " << r.config.trials << " draws, seed " << r.config.seed
          << " (bits per channel use)\n";
        s << "rho_db";
        for (const auto& c : r.capacity->curves) s << "\t" << c.scheme.name();
        s << "\n";
        for (std::size_t p = 0; p < grid.size(); ++p) {
            s << short_fmt(grid[p], "%.1f");
            for (const auto& c : r.capacity->curves) s << "\t" << short_fmt(c.mean_bits[p], "%.4f");
            s << "\n";
        }
    } else {
        s << "ber " << r.config.nt << "x" << r.config.nr << ", seed " << r.config.seed << "\n";
        s << "rho_db";
        for (const auto& c : r.ber) s << "\t" << c.system << " (" << c.constellation << ")";
        for (const auto& c : r.analytic) s << "\t" << c.system << " analytic";
        s << "\n";
        for (std::size_t p = 0; p < grid.size(); ++p) {
            s << short_fmt(grid[p], "%.1f");
            for (const auto& c : r.ber) s << "\t" << short_fmt(c.points[p].ber, "%.3e") << (c.points[p].capped ? "*" : "");
            for (const auto& c : r.analytic) s << "\t" << short_fmt(c.points[p].ber, "%.3e");
            s << "\n";
        }
        bool any_capped = false;
        for (const auto& c : r.ber)
            for (const auto& p : c.points) any_capped = any_capped || p.capped;
        if (any_capped) s << "* stopped at the bit budget before reaching min_errors\n";
    }
    if (r.config.compare) {
        s << "crossings:\n";
        if (r.crossings.empty()) s << "  none\n";
        for (const auto& c : r.crossings)
            s << "  " << c.a << " / " << c.b << " at " << short_fmt(c.crossing.rho_db, "%.2f") << " dB"
              << (c.crossing.low_confidence ? " (within 2 standard errors)" : "") << "\n";
        s << (r.capacity ? "highest capacity:\n" : "lowest BER:\n");
        for (const auto& g : r.regions) {
            s << "  " << g.name << ": ";
            if (std::isinf(g.from_db) && std::isinf(g.to_db)) s << "whole grid\n";
            else if (std::isinf(g.from_db)) s << "up to " << short_fmt(g.to_db, "%.2f") << " dB\n";
            else if (std::isinf(g.to_db)) s << "from " << short_fmt(g.from_db, "%.2f") << " dB\n";
            else s << short_fmt(g.from_db, "%.2f") << " .. " << short_fmt(g.to_db, "%.2f") << " dB\n";
        }
    }
    return s.str();
}

} // namespace bnmimo::app
