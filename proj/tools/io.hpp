#pragma once

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "expfit/mpnum.hpp"
#include "expfit/pde.hpp"
#include "expfit/spectral.hpp"
#include "json.hpp"

namespace expfit::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Bad configuration or input files; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// Hex SHA-256 of the config in canonical (sorted-key, compact) form.
inline std::string config_hash(const json& cfg) {
  const std::string text = cfg.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// ---- Config field access ----

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

// Reals are decimal strings or JSON numbers; numbers go through their shortest text form.
inline Real real_of(const json& v, prec_t p, const char* what) {
  try {
    if (v.is_string()) return Real(v.get<std::string>(), p);
    if (v.is_number()) return Real(v.dump(), p);
  } catch (const Error&) {
  }
  throw ConfigError(std::string("field '") + what + "' must be a decimal number");
}

inline Real real_field(const json& j, const char* key, prec_t p) { return real_of(require(j, key), p, key); }

inline Real real_field(const json& j, const char* key, const char* fallback, prec_t p) {
  return j.contains(key) ? real_of(j.at(key), p, key) : Real(fallback, p);
}

inline RealVec real_list(const json& j, const char* key, prec_t p) {
  const json& v = require(j, key);
  if (!v.is_array()) throw ConfigError(std::string("field '") + key + "' must be an array");
  RealVec out;
  for (const auto& e : v) out.push_back(real_of(e, p, key));
  return out;
}

template <class T>
T int_field(const json& j, const char* key, std::optional<T> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  const json& v = j.at(key);
  if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0))
    throw ConfigError(std::string("field '") + key + "' must be a nonnegative integer");
  return v.get<T>();
}

inline std::string string_field(const json& j, const char* key, std::optional<std::string> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  if (!j.at(key).is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

// ---- Serialization ----

// CSV cells carry min(50, digits) significant digits unless full precision is requested.
struct NumberFormat {
  bool full = false;
  std::string operator()(const Real& x) const {
    return full ? x.to_string() : x.to_string(std::min<long>(50, digits_of(x.prec()) + 1));
  }
};

inline json real_json(const Real& x) { return x.to_string(); }

inline json real_list_json(const RealVec& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(real_json(x));
  return a;
}

struct Stamp {
  prec_t prec_bits = 0;
  std::uint64_t seed = 0;
  std::string hash;

  json to_json() const { return {{"prec_bits", prec_bits}, {"seed", seed}, {"config_hash", hash}}; }
  std::string csv_header() const {
    return "# prec_bits=" + std::to_string(prec_bits) + "\n# seed=" + std::to_string(seed) + "\n# config_hash=" + hash + "\n";
  }
};

// Tracks files written by a command so a failed run can remove its partial outputs.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  fs::path write(const std::string& name, const std::string& text) {
    fs::create_directories(dir_);
    fs::path path = dir_ / name;
    written_.push_back(path);
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return path;
  }
  fs::path write_json(const std::string& name, const json& j) { return write(name, j.dump(2) + "\n"); }

  void remove_all() {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
  }
  const std::vector<fs::path>& files() const { return written_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

// ---- Trace files: header comments, then "t,y" rows at full precision ----

inline std::string trace_csv(const MeasurementTrace& tr, const Stamp& stamp) {
  std::ostringstream os;
  os << stamp.csv_header() << "# delta=" << tr.delta.to_string() << "\n# source=" << source_name(tr.source) << "\nt,y\n";
  for (std::size_t k = 0; k < tr.samples.size(); ++k)
    os << (tr.delta * static_cast<long>(k)).to_string() << "," << tr.samples[k].to_string() << "\n";
  return os.str();
}

struct LoadedTrace {
  MeasurementTrace trace;
  prec_t prec = 0;
};

inline LoadedTrace read_trace_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace " + path.string());
  LoadedTrace out;
  std::string line, delta_text, source = "synthetic";
  bool header_seen = false;
  std::vector<std::string> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(2, eq - 2), val = line.substr(eq + 1);
      if (key == "prec_bits") out.prec = static_cast<prec_t>(std::stoul(val));
      if (key == "delta") delta_text = val;
      if (key == "source") source = val;
      continue;
    }
    if (!header_seen) {
      if (line != "t,y") throw ConfigError(path.string() + ": expected header 't,y'");
      header_seen = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path.string() + ": malformed row '" + line + "'");
    values.push_back(line.substr(comma + 1));
  }
  if (out.prec == 0 || delta_text.empty()) throw ConfigError(path.string() + ": missing prec_bits or delta header");
  try {
    out.trace.delta = Real(delta_text, out.prec);
    for (const auto& v : values) out.trace.samples.emplace_back(v, out.prec);
  } catch (const Error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  out.trace.source = source == "pde-point"      ? MeasurementTrace::Source::PdePoint
                     : source == "pde-integral" ? MeasurementTrace::Source::PdeIntegral
                                                : MeasurementTrace::Source::Synthetic;
  return out;
}

// ---- Problem descriptors ----

// {"kind": "zero" | "constant" | "fourier" | "triangle" | "random_fourier", ...}
inline Potential potential_of(const json& d, std::uint64_t default_seed, prec_t p) {
  const std::string kind = string_field(d, "kind");
  if (kind == "zero") return Potential::zero(p);
  if (kind == "constant") return Potential::constant(real_field(d, "value", p));
  if (kind == "fourier") return Potential::fourier(real_list(d, "coeffs", p));
  if (kind == "triangle") return Potential::triangle(p);
  if (kind == "random_fourier")
    return random_fourier_potential(int_field<std::size_t>(d, "m"), int_field<std::uint64_t>(d, "seed", default_seed), p);
  throw ConfigError("unknown potential kind '" + kind + "'");
}

// Resolved form written to metadata: coefficients for Fourier potentials, the kind otherwise.
inline json potential_json(const Potential& q) {
  switch (q.kind) {
    case Potential::Kind::FourierCosine: return {{"kind", "fourier"}, {"coeffs", real_list_json(q.coeffs)}};
    case Potential::Kind::Triangle: return {{"kind", "triangle"}};
    case Potential::Kind::Tabulated: break;
  }
  throw ConfigError("tabulated potentials are not serialized");
}

// {"kind": "default", "n_terms": 60}, {"kind": "sine", "coeffs": [...]} or {"kind": "random", "m": 6, "seed": 2}
inline SineSeries sine_series_of(const json& d, std::uint64_t default_seed, prec_t p) {
  const std::string kind = string_field(d, "kind");
  if (kind == "default") return default_initial_condition(int_field<std::size_t>(d, "n_terms", 60), p);
  if (kind == "sine") return SineSeries{real_list(d, "coeffs", p)};
  if (kind == "random") return random_kernel(int_field<std::size_t>(d, "m"), int_field<std::uint64_t>(d, "seed", default_seed), p);
  throw ConfigError("unknown sine-series kind '" + kind + "'");
}

}  // namespace expfit::cli
