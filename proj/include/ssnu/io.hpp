#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ssnu/clock.hpp"
#include "ssnu/factory.hpp"
#include "ssnu/verify.hpp"

namespace ssnu {

/// A file could not be read, written, or parsed.
struct IOError : Error {
    using Error::Error;
};

/// A config file is malformed, missing a required key, or contains keys the
/// consumer does not understand.
struct ConfigError : Error {
    using Error::Error;
};

namespace io {

// --------------------------------------------------------------------------
// Field snapshots.  Binary layout (all integers uint32 little-endian,
// all floats IEEE-754 binary64 little-endian):
//   "SSNU" | version | dim | n | ncomp | tag | box(f64) |
//   note_len | note bytes | samples (component-major, row-major nodes) |
//   fnv1a-64 checksum of everything before it
// --------------------------------------------------------------------------

inline constexpr std::uint32_t snapshot_version = 1;

void write_field(const std::string& path, const Field& f, const std::string& note = "");
/// Verifies magic, version, and checksum; throws IOError on any mismatch.
Field read_field(const std::string& path, std::string* note = nullptr);

// --------------------------------------------------------------------------
// CSV.  Numbers are written with 17 significant digits so that
// write -> read -> write is bit-stable.
// --------------------------------------------------------------------------

std::string format_real(Real v);

/// `header` is the comma-separated column names; columns must share length.
void write_table(const std::string& path, const std::string& header,
                 const std::vector<std::vector<Real>>& columns,
                 const std::vector<std::string>& comments = {});
/// Returns the columns; `#` lines are skipped, the header line is required.
std::vector<std::vector<Real>> read_table(const std::string& path,
                                          std::string* header = nullptr);

/// Two-column convenience wrappers for `t,value`-style series.
void write_series(const std::string& path, const std::string& header,
                  const std::vector<Real>& t, const std::vector<Real>& v);

// --------------------------------------------------------------------------
// Verification reports: CSV `check,t,lhs,rhs,margin,tolerance,pass` plus a
// trailing `# summary: ...` line.
// --------------------------------------------------------------------------

void write_report(const std::string& path, const VerificationReport& rep);
VerificationReport read_report(const std::string& path);

// --------------------------------------------------------------------------
// Flat key = value config with optional [section] headers; a key inside
// [section] is addressed as "section.key".  Lines starting with '#' (or a
// trailing " # comment") are ignored.  Consumers read keys through the typed
// getters, which mark them consumed; require_consumed() then rejects any
// leftover key so misspellings never silently fall back to defaults.
// --------------------------------------------------------------------------

class Config {
  public:
    static Config parse(const std::string& text, const std::string& origin = "<string>");
    static Config load(const std::string& path);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    Real get_real(const std::string& key);
    Real get_real(const std::string& key, Real fallback);
    long long get_int(const std::string& key);
    long long get_int(const std::string& key, long long fallback);
    unsigned long long get_uint(const std::string& key, unsigned long long fallback);
    bool get_bool(const std::string& key, bool fallback);

    /// Overrides (or inserts) a value, e.g. from a command-line flag.
    void set(const std::string& key, const std::string& value);

    /// Keys never consumed by a getter.
    std::vector<std::string> unconsumed() const;
    /// Throws ConfigError listing every unconsumed key.
    void require_consumed() const;

    /// The full key -> value map (for manifest echoes).
    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::string origin_;
    std::map<std::string, std::string> kv_;
    std::map<std::string, bool> used_;

    const std::string& raw(const std::string& key);
};

// --------------------------------------------------------------------------
// Content hashing and run manifests.
// --------------------------------------------------------------------------

std::uint64_t fnv1a(const void* data, std::size_t len,
                    std::uint64_t seed = 1469598103934665603ull);
/// Hash of a file's bytes, as a fixed-width hex string; throws if unreadable.
std::string file_hash(const std::string& path);

struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::map<std::string, std::string> config_echo;
    std::map<std::string, std::string> artifact_hashes;  // relative path -> hash
    Real wall_seconds = 0;
    std::string version = "1.0.0";

    /// Hashes every regular file in `dir` except the manifest itself, then
    /// writes dir/manifest.json.
    void finalize(const std::string& dir);
};
RunManifest read_manifest(const std::string& dir);

// --------------------------------------------------------------------------
// Composite artifacts.
// --------------------------------------------------------------------------

/// eta_re.ssnu + eta_im.ssnu + eigenpair.json
/// {lambda_re, lambda_im, a, residual, eta_mass_margin, profile_id, n, L_box}.
void write_eigenpair(const std::string& dir, const Eigenpair& e,
                     const std::string& profile_id);
Eigenpair read_eigenpair(const std::string& dir, std::string* profile_id = nullptr);

/// CSV `t,W`; the header comment records (seed, dt, t_end, zero_noise,
/// generator) so the file is reproducible bit-for-bit from the parameters.
void write_path(const std::string& path, const BrownianPath& p);
BrownianPath read_path(const std::string& path);

void write_certificate(const std::string& path, const PicardCertificate& c);
PicardCertificate read_certificate(const std::string& path);

/// Uniform-in-tau trajectory as a directory: node snapshots u_%06zu.ssnu
/// plus index.csv `tau,l2_norm`.
void write_trajectory(const std::string& dir, const WindowedTrajectory& traj);
WindowedTrajectory read_trajectory(const std::string& dir);

/// SolutionPair directory:
///   fit.csv              t,norm1,norm2,separation  (full solver resolution)
///   index.csv            t,norm1,norm2,separation  (stored snapshots only)
///   u1_%04zu / u2_%04zu / f_%04zu .ssnu snapshots
///   certificate.json, pair.json (slope, window, provenance)
void write_pair(const std::string& dir, const SolutionPair& pair);
SolutionPair read_pair(const std::string& dir);

}  // namespace io
}  // namespace ssnu
