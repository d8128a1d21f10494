#include "ssnu/io.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace ssnu::io {

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");
static_assert(sizeof(Real) == 8, "snapshot floats are binary64");

namespace {

void append_bytes(std::string& buf, const void* p, std::size_t len) {
    buf.append(static_cast<const char*>(p), len);
}
void append_u32(std::string& buf, std::uint32_t v) { append_bytes(buf, &v, 4); }
void append_f64(std::string& buf, Real v) { append_bytes(buf, &v, 8); }

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;
    std::string where;

    void take(void* out, std::size_t len) {
        if (pos + len > buf.size())
            throw IOError(where + ": truncated file");
        std::memcpy(out, buf.data() + pos, len);
        pos += len;
    }
    std::uint32_t u32() { std::uint32_t v; take(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; take(&v, 8); return v; }
    Real f64() { Real v; take(&v, 8); return v; }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spew(const std::string& path, const std::string& data) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot open " + path + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IOError("short write to " + path);
}

json read_json(const std::string& path) {
    try {
        return json::parse(slurp(path));
    } catch (const json::exception& e) {
        throw IOError(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const json& j) {
    spew(path, j.dump(2) + "\n");
}

}  // namespace

// --------------------------------------------------------------------------
// snapshots
// --------------------------------------------------------------------------

void write_field(const std::string& path, const Field& f, const std::string& note) {
    f.check_finite("write_field");
    std::string buf;
    buf.reserve(64 + note.size() + 8 * f.ncomp() * f.grid().node_count());
    buf += "SSNU";
    append_u32(buf, snapshot_version);
    append_u32(buf, static_cast<std::uint32_t>(f.grid().dim()));
    append_u32(buf, static_cast<std::uint32_t>(f.grid().n()));
    append_u32(buf, static_cast<std::uint32_t>(f.ncomp()));
    append_u32(buf, f.tag() == VarTag::physical ? 0u : 1u);
    append_f64(buf, f.grid().box());
    append_u32(buf, static_cast<std::uint32_t>(note.size()));
    buf += note;
    for (int c = 0; c < f.ncomp(); ++c) {
        const std::vector<Real> vals = f.physical(c);
        append_bytes(buf, vals.data(), 8 * vals.size());
    }
    const std::uint64_t sum = fnv1a(buf.data(), buf.size());
    append_bytes(buf, &sum, 8);
    spew(path, buf);
}

Field read_field(const std::string& path, std::string* note) {
    const std::string buf = slurp(path);
    ByteReader r{buf, 0, path};
    char magic[4];
    r.take(magic, 4);
    if (std::memcmp(magic, "SSNU", 4) != 0) throw IOError(path + ": bad magic");
    const std::uint32_t version = r.u32();
    if (version != snapshot_version)
        throw IOError(path + ": unsupported snapshot version " + std::to_string(version));
    const int dim = static_cast<int>(r.u32());
    const int n = static_cast<int>(r.u32());
    const int ncomp = static_cast<int>(r.u32());
    const std::uint32_t tag = r.u32();
    const Real box = r.f64();
    const std::uint32_t note_len = r.u32();
    if (r.pos + note_len > buf.size()) throw IOError(path + ": truncated note");
    std::string note_str = buf.substr(r.pos, note_len);
    r.pos += note_len;
    if (tag > 1) throw IOError(path + ": bad tag field");
    if (ncomp < 1 || ncomp > 3) throw IOError(path + ": bad component count");

    Grid g(dim, n, box);
    if (buf.size() != r.pos + 8 * static_cast<std::size_t>(ncomp) * g.node_count() + 8)
        throw IOError(path + ": size does not match header");
    const std::uint64_t declared = fnv1a(buf.data(), buf.size() - 8);
    std::uint64_t stored;
    std::memcpy(&stored, buf.data() + buf.size() - 8, 8);
    if (declared != stored) throw IOError(path + ": checksum mismatch (file corrupted)");

    Field f(g, ncomp, tag == 0 ? VarTag::physical : VarTag::similarity);
    std::vector<Real> vals(g.node_count());
    for (int c = 0; c < ncomp; ++c) {
        r.take(vals.data(), 8 * vals.size());
        f.set_physical(c, vals);
    }
    f.check_finite(("read_field " + path).c_str());
    if (note) *note = std::move(note_str);
    return f;
}

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

std::string format_real(Real v) {
    char tmp[40];
    std::snprintf(tmp, sizeof tmp, "%.17g", v);
    return tmp;
}

void write_table(const std::string& path, const std::string& header,
                 const std::vector<std::vector<Real>>& columns,
                 const std::vector<std::string>& comments) {
    if (columns.empty()) throw IOError("write_table: no columns");
    const std::size_t rows = columns.front().size();
    for (const auto& col : columns)
        if (col.size() != rows) throw IOError("write_table: ragged columns");
    std::string buf;
    for (const auto& c : comments) buf += "# " + c + "\n";
    buf += header + "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) buf += ',';
            buf += format_real(columns[c][i]);
        }
        buf += '\n';
    }
    spew(path, buf);
}

std::vector<std::vector<Real>> read_table(const std::string& path, std::string* header) {
    std::istringstream in(slurp(path));
    std::string line;
    bool have_header = false;
    std::vector<std::vector<Real>> cols;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        if (!have_header) {
            if (header) *header = line;
            have_header = true;
            continue;
        }
        std::vector<Real> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            const std::string cell =
                line.substr(start, comma == std::string::npos ? comma : comma - start);
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IOError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cols.empty()) cols.resize(row.size());
        if (row.size() != cols.size())
            throw IOError(path + ":" + std::to_string(lineno) + ": inconsistent column count");
        for (std::size_t c = 0; c < row.size(); ++c) cols[c].push_back(row[c]);
    }
    if (!have_header) throw IOError(path + ": missing header line");
    return cols;
}

void write_series(const std::string& path, const std::string& header,
                  const std::vector<Real>& t, const std::vector<Real>& v) {
    write_table(path, header, {t, v});
}

// --------------------------------------------------------------------------
// verification reports
// --------------------------------------------------------------------------

void write_report(const std::string& path, const VerificationReport& rep) {
    std::string buf = "check,t,lhs,rhs,margin,tolerance,pass\n";
    for (const auto& r : rep.rows) {
        buf += r.name + ',' + format_real(r.t) + ',' + format_real(r.lhs) + ',' +
               format_real(r.rhs) + ',' + format_real(r.margin) + ',' +
               format_real(r.tolerance) + ',' + (r.pass ? "1" : "0") + '\n';
    }
    buf += std::string("# summary: ") + (rep.pass ? "PASS" : "FAIL") + " worst_margin=" +
           format_real(rep.worst) + " checks=" + std::to_string(rep.rows.size()) + "\n";
    spew(path, buf);
}

VerificationReport read_report(const std::string& path) {
    std::istringstream in(slurp(path));
    std::string line;
    VerificationReport rep;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        if (!have_header) {
            if (line != "check,t,lhs,rhs,margin,tolerance,pass")
                throw IOError(path + ": unexpected report header '" + line + "'");
            have_header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != 7)
            throw IOError(path + ":" + std::to_string(lineno) + ": expected 7 cells");
        CheckRow row;
        row.name = cells[0];
        try {
            row.t = std::stod(cells[1]);
            row.lhs = std::stod(cells[2]);
            row.rhs = std::stod(cells[3]);
            row.margin = std::stod(cells[4]);
            row.tolerance = std::stod(cells[5]);
        } catch (const std::exception&) {
            throw IOError(path + ":" + std::to_string(lineno) + ": bad number");
        }
        row.pass = cells[6] == "1";
        rep.add(row);
    }
    if (!have_header) throw IOError(path + ": missing report header");
    return rep;
}

// --------------------------------------------------------------------------
// config
// --------------------------------------------------------------------------

namespace {
std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}
}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        if (cfg.kv_.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        cfg.kv_[key] = value;
        cfg.used_[key] = false;
    }
    return cfg;
}

Config Config::load(const std::string& path) { return parse(slurp(path), path); }

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

const std::string& Config::raw(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end())
        throw ConfigError(origin_ + ": missing required key '" + key + "'");
    used_[key] = true;
    return it->second;
}

std::string Config::get_string(const std::string& key) { return raw(key); }
std::string Config::get_string(const std::string& key, const std::string& fallback) {
    return has(key) ? raw(key) : fallback;
}

Real Config::get_real(const std::string& key) {
    const std::string& v = raw(key);
    try {
        std::size_t used;
        Real out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "': not a number: '" + v + "'");
    }
}
Real Config::get_real(const std::string& key, Real fallback) {
    return has(key) ? get_real(key) : fallback;
}

long long Config::get_int(const std::string& key) {
    const std::string& v = raw(key);
    try {
        std::size_t used;
        long long out = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "': not an integer: '" + v + "'");
    }
}
long long Config::get_int(const std::string& key, long long fallback) {
    return has(key) ? get_int(key) : fallback;
}

unsigned long long Config::get_uint(const std::string& key, unsigned long long fallback) {
    if (!has(key)) return fallback;
    const std::string& v = raw(key);
    try {
        std::size_t used;
        unsigned long long out = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "': not an unsigned integer: '" + v + "'");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string& v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(origin_ + ": key '" + key + "': not a boolean: '" + v + "'");
}

void Config::set(const std::string& key, const std::string& value) {
    kv_[key] = value;
    used_[key] = false;
}

std::vector<std::string> Config::unconsumed() const {
    std::vector<std::string> out;
    for (const auto& [k, used] : used_)
        if (!used) out.push_back(k);
    return out;
}

void Config::require_consumed() const {
    const auto bad = unconsumed();
    if (bad.empty()) return;
    std::string msg = origin_ + ": unknown key(s):";
    for (const auto& k : bad) msg += " '" + k + "'";
    throw ConfigError(msg);
}

// --------------------------------------------------------------------------
// hashing and manifests
// --------------------------------------------------------------------------

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string file_hash(const std::string& path) {
    const std::string data = slurp(path);
    char tmp[24];
    std::snprintf(tmp, sizeof tmp, "%016" PRIx64, fnv1a(data.data(), data.size()));
    return tmp;
}

void RunManifest::finalize(const std::string& dir) {
    artifact_hashes.clear();
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::relative(entry.path(), dir).generic_string();
        if (rel == "manifest.json") continue;
        artifact_hashes[rel] = file_hash(entry.path().string());
    }
    json j;
    j["subcommand"] = subcommand;
    j["config_path"] = config_path;
    j["config"] = config_echo;
    j["artifacts"] = artifact_hashes;
    j["wall_seconds"] = wall_seconds;
    j["version"] = version;
    j["snapshot_format"] = snapshot_version;
    write_json((fs::path(dir) / "manifest.json").string(), j);
}

RunManifest read_manifest(const std::string& dir) {
    const json j = read_json((fs::path(dir) / "manifest.json").string());
    RunManifest m;
    try {
        m.subcommand = j.at("subcommand").get<std::string>();
        m.config_path = j.at("config_path").get<std::string>();
        m.config_echo = j.at("config").get<std::map<std::string, std::string>>();
        m.artifact_hashes = j.at("artifacts").get<std::map<std::string, std::string>>();
        m.wall_seconds = j.at("wall_seconds").get<Real>();
        m.version = j.at("version").get<std::string>();
    } catch (const json::exception& e) {
        throw IOError(dir + "/manifest.json: " + e.what());
    }
    return m;
}

// --------------------------------------------------------------------------
// composite artifacts
// --------------------------------------------------------------------------

void write_eigenpair(const std::string& dir, const Eigenpair& e, const std::string& profile_id) {
    fs::create_directories(dir);
    write_field((fs::path(dir) / "eta_re.ssnu").string(), e.eta_re, "eigenfunction real part");
    write_field((fs::path(dir) / "eta_im.ssnu").string(), e.eta_im, "eigenfunction imaginary part");
    json j;
    j["lambda_re"] = e.lambda.real();
    j["lambda_im"] = e.lambda.imag();
    j["a"] = e.growth_rate;
    j["residual"] = e.residual;
    j["eta_mass_margin"] = e.eta_mass_margin;
    j["profile_id"] = profile_id;
    j["n"] = e.eta_re.grid().n();
    j["L_box"] = e.eta_re.grid().box();
    write_json((fs::path(dir) / "eigenpair.json").string(), j);
}

Eigenpair read_eigenpair(const std::string& dir, std::string* profile_id) {
    Eigenpair e;
    e.eta_re = read_field((fs::path(dir) / "eta_re.ssnu").string());
    e.eta_im = read_field((fs::path(dir) / "eta_im.ssnu").string());
    const json j = read_json((fs::path(dir) / "eigenpair.json").string());
    try {
        e.lambda = Complex(j.at("lambda_re").get<Real>(), j.at("lambda_im").get<Real>());
        e.growth_rate = j.at("a").get<Real>();
        e.residual = j.at("residual").get<Real>();
        e.eta_mass_margin = j.at("eta_mass_margin").get<Real>();
        if (profile_id) *profile_id = j.at("profile_id").get<std::string>();
    } catch (const json::exception& ex) {
        throw IOError(dir + "/eigenpair.json: " + ex.what());
    }
    if (e.eta_re.grid() != e.eta_im.grid())
        throw IOError(dir + ": eigenfunction parts live on different grids");
    return e;
}

void write_path(const std::string& path, const BrownianPath& p) {
    std::vector<Real> t(p.w.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = p.time(i);
    write_table(path, "t,W", {t, p.w},
                {"seed=" + std::to_string(p.seed) + " dt=" + format_real(p.dt) +
                 " t_end=" + format_real(p.t_end) +
                 " zero_noise=" + (p.zero_noise ? std::string("1") : std::string("0")) +
                 " generator=mt19937_64-gauss-v1"});
}

BrownianPath read_path(const std::string& path) {
    std::string header;
    // First comment line carries the parameters.
    std::istringstream in(slurp(path));
    std::string line, params;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '#') {
            params = line;
            break;
        }
    }
    const auto cols = read_table(path, &header);
    if (header != "t,W" || cols.size() != 2) throw IOError(path + ": not a path file");
    BrownianPath p;
    auto grab = [&](const std::string& key) -> std::string {
        const std::string tagged = key + "=";
        std::size_t at = params.find(tagged);
        if (at == std::string::npos) throw IOError(path + ": header lacks " + key);
        std::size_t end = params.find(' ', at);
        return params.substr(at + tagged.size(),
                             end == std::string::npos ? end : end - at - tagged.size());
    };
    p.seed = std::stoull(grab("seed"));
    p.dt = std::stod(grab("dt"));
    p.t_end = std::stod(grab("t_end"));
    p.zero_noise = grab("zero_noise") == "1";
    p.w = cols[1];
    if (p.w.empty() || p.w.front() != 0) throw IOError(path + ": path must start at W(0)=0");
    return p;
}

void write_certificate(const std::string& path, const PicardCertificate& c) {
    json j;
    j["pipeline"] = c.pipeline;
    j["tau0"] = c.tau0;
    j["T"] = c.cap;
    j["iterations"] = c.iterations;
    j["final_update"] = c.final_update;
    j["contraction"] = c.contraction;
    j["bound_margin"] = c.bound_margin;
    j["tail_estimate"] = c.tail_estimate;
    j["fixed_point_residual"] = c.fixed_point_residual;
    j["accepted"] = c.accepted;
    write_json(path, j);
}

PicardCertificate read_certificate(const std::string& path) {
    const json j = read_json(path);
    PicardCertificate c;
    try {
        c.pipeline = j.at("pipeline").get<std::string>();
        c.tau0 = j.at("tau0").get<Real>();
        c.cap = j.at("T").get<Real>();
        c.iterations = j.at("iterations").get<int>();
        c.final_update = j.at("final_update").get<Real>();
        c.contraction = j.at("contraction").get<Real>();
        c.bound_margin = j.at("bound_margin").get<Real>();
        c.tail_estimate = j.at("tail_estimate").get<Real>();
        c.fixed_point_residual = j.at("fixed_point_residual").get<Real>();
        c.accepted = j.at("accepted").get<bool>();
    } catch (const json::exception& e) {
        throw IOError(path + ": " + e.what());
    }
    return c;
}

namespace {
std::string numbered(const char* stem, std::size_t i, const char* ext = ".ssnu") {
    char tmp[64];
    std::snprintf(tmp, sizeof tmp, "%s_%06zu%s", stem, i, ext);
    return tmp;
}
}  // namespace

void write_trajectory(const std::string& dir, const WindowedTrajectory& traj) {
    fs::create_directories(dir);
    std::vector<Real> taus(traj.size()), norms(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        taus[i] = traj.tau(i);
        norms[i] = traj.nodes[i].l2_norm();
        write_field((fs::path(dir) / numbered("u", i)).string(), traj.nodes[i]);
    }
    write_table((fs::path(dir) / "index.csv").string(), "tau,l2_norm", {taus, norms},
                {"tau_min=" + format_real(traj.tau_min) + " dtau=" + format_real(traj.dtau)});
}

WindowedTrajectory read_trajectory(const std::string& dir) {
    const auto cols = read_table((fs::path(dir) / "index.csv").string());
    if (cols.size() != 2) throw IOError(dir + "/index.csv: expected 2 columns");
    WindowedTrajectory traj;
    const auto& taus = cols[0];
    if (taus.size() < 2) throw IOError(dir + ": trajectory needs at least 2 nodes");
    traj.tau_min = taus.front();
    traj.dtau = taus[1] - taus[0];
    traj.nodes.reserve(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i)
        traj.nodes.push_back(read_field((fs::path(dir) / numbered("u", i)).string()));
    return traj;
}

void write_pair(const std::string& dir, const SolutionPair& pair) {
    fs::create_directories(dir);
    write_table((fs::path(dir) / "fit.csv").string(), "t,norm1,norm2,separation",
                {pair.fit_times, pair.norm1, pair.norm2, pair.separation});

    std::vector<Real> n1(pair.times.size()), n2(pair.times.size()), sep(pair.times.size());
    for (std::size_t i = 0; i < pair.times.size(); ++i) {
        n1[i] = pair.u1[i].l2_norm();
        n2[i] = pair.u2[i].l2_norm();
        sep[i] = (pair.u1[i] - pair.u2[i]).l2_norm();
        write_field((fs::path(dir) / numbered("u1", i)).string(), pair.u1[i]);
        write_field((fs::path(dir) / numbered("u2", i)).string(), pair.u2[i]);
        write_field((fs::path(dir) / numbered("f", i)).string(), pair.force[i]);
    }
    write_table((fs::path(dir) / "index.csv").string(), "t,norm1,norm2,separation",
                {pair.times, n1, n2, sep});
    if (!pair.times_v.empty()) {
        // Stochastic pipeline: the transformed trajectories on the clock axis
        // carry the classical PDE the verifier checks (v-level, with a random
        // viscosity per node).
        for (std::size_t i = 0; i < pair.times_v.size(); ++i) {
            write_field((fs::path(dir) / numbered("v1", i)).string(), pair.v1[i]);
            write_field((fs::path(dir) / numbered("v2", i)).string(), pair.v2[i]);
            write_field((fs::path(dir) / numbered("g", i)).string(), pair.vforce[i]);
        }
        write_table((fs::path(dir) / "index_v.csv").string(), "s,visc",
                    {pair.times_v, pair.visc});
    }
    write_certificate((fs::path(dir) / "certificate.json").string(), pair.cert);
    json j;
    j["separation_slope"] = pair.separation_slope;
    j["t_lo"] = pair.t_lo;
    j["t_hi"] = pair.t_hi;
    j["provenance"] = pair.provenance;
    write_json((fs::path(dir) / "pair.json").string(), j);
}

SolutionPair read_pair(const std::string& dir) {
    SolutionPair pair;
    {
        const auto cols = read_table((fs::path(dir) / "fit.csv").string());
        if (cols.size() != 4) throw IOError(dir + "/fit.csv: expected 4 columns");
        pair.fit_times = cols[0];
        pair.norm1 = cols[1];
        pair.norm2 = cols[2];
        pair.separation = cols[3];
    }
    const auto idx = read_table((fs::path(dir) / "index.csv").string());
    if (idx.size() != 4) throw IOError(dir + "/index.csv: expected 4 columns");
    pair.times = idx[0];
    for (std::size_t i = 0; i < pair.times.size(); ++i) {
        pair.u1.push_back(read_field((fs::path(dir) / numbered("u1", i)).string()));
        pair.u2.push_back(read_field((fs::path(dir) / numbered("u2", i)).string()));
        pair.force.push_back(read_field((fs::path(dir) / numbered("f", i)).string()));
    }
    if (fs::exists(fs::path(dir) / "index_v.csv")) {
        const auto idxv = read_table((fs::path(dir) / "index_v.csv").string());
        if (idxv.size() != 2) throw IOError(dir + "/index_v.csv: expected 2 columns");
        pair.times_v = idxv[0];
        pair.visc = idxv[1];
        for (std::size_t i = 0; i < pair.times_v.size(); ++i) {
            pair.v1.push_back(read_field((fs::path(dir) / numbered("v1", i)).string()));
            pair.v2.push_back(read_field((fs::path(dir) / numbered("v2", i)).string()));
            pair.vforce.push_back(read_field((fs::path(dir) / numbered("g", i)).string()));
        }
    }
    pair.cert = read_certificate((fs::path(dir) / "certificate.json").string());
    const json j = read_json((fs::path(dir) / "pair.json").string());
    try {
        pair.separation_slope = j.at("separation_slope").get<Real>();
        pair.t_lo = j.at("t_lo").get<Real>();
        pair.t_hi = j.at("t_hi").get<Real>();
        pair.provenance = j.at("provenance").get<std::string>();
    } catch (const json::exception& e) {
        throw IOError(dir + "/pair.json: " + e.what());
    }
    return pair;
}

}  // namespace ssnu::io
