// Command-line front end: estimate (element stream), size (bucket-limit
// formulas), simulate (Monte Carlo over generated streams), sets (stream of
// ranges/cuboids).  Exit codes: 0 ok, 1 usage, 2 bad input, 3 aborted run.
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cutoff/delphic.hpp"
#include "cutoff/harness.hpp"
#include "cutoff/sizing.hpp"
#include "cutoff/sketch.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitAbort = 3;

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Collects fields once, renders as `key value` lines or one JSON object.
struct Emitter {
  bool json = false;
  ordered_json js = ordered_json::object();
  std::ostringstream text;

  void field(const char* k, const std::string& v) {
    js[k] = v;
    text << k << ' ' << v << '\n';
  }
  void field(const char* k, std::uint64_t v) {
    js[k] = v;
    text << k << ' ' << v << '\n';
  }
  void field(const char* k, double v) {
    js[k] = v;
    text << k << ' ' << fmt_double(v) << '\n';
  }
  void trace(const cutoff::Transcript& tr) {
    if (json) {
      auto arr = ordered_json::array();
      for (const auto& st : tr.steps) {
        ordered_json rec;
        rec["t"] = st.t;
        rec["cutoff"] = st.cutoff;
        rec["size"] = st.members.size();
        arr.push_back(std::move(rec));
      }
      js["trace"] = std::move(arr);
    } else {
      for (const auto& st : tr.steps)
        text << "step " << st.t << " cutoff " << fmt_double(st.cutoff)
             << " size " << st.members.size() << '\n';
    }
  }
  void flush() {
    if (json)
      std::cout << js.dump() << '\n';
    else
      std::cout << text.str();
  }
};

int usage_error(const std::string& msg) {
  std::cerr << "error: " << msg << '\n';
  return kExitUsage;
}

int input_error(const std::string& msg) {
  std::cerr << "error: " << msg << '\n';
  return kExitInput;
}

std::optional<cutoff::Variant> parse_variant(const std::string& name,
                                             bool allow_tracking) {
  using cutoff::Variant;
  if (name == "dond") return Variant::DonD;
  if (name == "dondp") return Variant::DonDPrime;
  if (name == "cvm1") return Variant::Cvm1;
  if (name == "cvm2") return Variant::Cvm2;
  if (name == "cvm2refuse") return Variant::Cvm2Refuse;
  if (allow_tracking && name == "tracking") return Variant::Tracking;
  return std::nullopt;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// One trimmed line per call; false at end of input.  Strips a trailing CR so
// CRLF files behave.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

struct LineReader {
  std::ifstream file;
  std::istream* in = nullptr;

  // Empty name or "-" reads stdin.
  bool open(const std::string& name, std::string& err) {
    if (name.empty() || name == "-") {
      in = &std::cin;
      return true;
    }
    file.open(name);
    if (!file) {
      err = "cannot open " + name;
      return false;
    }
    in = &file;
    return true;
  }
};

// Shared sizing flags: exactly one of --s or the (--epsilon, --delta) pair.
struct SizeFlags {
  std::uint64_t s = 0;
  double epsilon = 0.5;
  double delta = 0.1;
  CLI::Option* s_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
  CLI::Option* delta_opt = nullptr;

  void attach(CLI::App* cmd) {
    s_opt = cmd->add_option("--s", s, "explicit bucket limit");
    eps_opt = cmd->add_option("--epsilon", epsilon, "target relative error");
    delta_opt = cmd->add_option("--delta", delta, "target failure probability");
  }
  // 0 on success, else an exit code already reported.
  int resolve(cutoff::Variant variant, bool tracking, std::uint64_t m,
              std::uint64_t n, std::uint64_t& out) const {
    const bool explicit_s = s_opt->count() > 0;
    const bool band = eps_opt->count() > 0 || delta_opt->count() > 0;
    if (explicit_s && band)
      return usage_error("--s conflicts with --epsilon/--delta");
    if (explicit_s) {
      if (s == 0) return usage_error("--s must be at least 1");
      out = s;
      return 0;
    }
    if (epsilon <= 0.0 || epsilon > 1.0)
      return usage_error("--epsilon must lie in (0, 1]");
    if (delta <= 0.0 || delta > 1.0)
      return usage_error("--delta must lie in (0, 1]");
    cutoff::SizingParams p;
    p.epsilon = epsilon;
    p.delta = delta;
    p.m = m;
    p.n = n;
    p.variant = tracking ? cutoff::Variant::Tracking : variant;
    out = cutoff::bucket_limit(p).s;
    return 0;
  }
};

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string input;
  std::string variant = "cvm2";
  SizeFlags size;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;  // 0 means unbounded
  std::uint64_t m = 0;  // 0 means "length of the stream"
  bool tracking = false;
  bool trace = false;
  std::string format = "kv";
};

int cmd_estimate(const EstimateArgs& a) {
  auto variant = parse_variant(a.variant, false);
  if (!variant) return usage_error("unknown variant " + a.variant);
  if (a.tracking && *variant != cutoff::Variant::Cvm2Refuse)
    return usage_error("--tracking requires --variant cvm2refuse");

  LineReader reader;
  std::string err;
  if (!reader.open(a.input, err)) return input_error(err);

  std::vector<std::uint64_t> stream;
  std::string line;
  std::uint64_t lineno = 0;
  while (next_line(*reader.in, line)) {
    ++lineno;
    if (line.empty())
      return input_error("line " + std::to_string(lineno) + ": empty token");
    stream.push_back(fnv1a64(line));
  }

  const std::uint64_t m_cap = a.m ? a.m : stream.size();
  const std::uint64_t n_cap =
      a.n ? a.n : std::numeric_limits<std::uint64_t>::max();
  std::uint64_t s = 0;
  if (int rc = a.size.resolve(*variant, a.tracking,
                              std::max<std::uint64_t>(1, m_cap), n_cap, s);
      rc != 0)
    return rc;

  auto cfg = cutoff::SketchConfig::for_variant(*variant, s);
  auto out = cutoff::run(cfg, a.seed, stream, n_cap, m_cap, a.trace);

  Emitter em;
  em.json = a.format == "json";
  if (!em.json && a.trace) em.trace(out.transcript);
  em.field("variant", std::string(cutoff::variant_name(*variant)));
  em.field("s", s);
  em.field("seed", a.seed);
  em.field("steps", out.report.steps_processed);
  em.field("status", std::string(out.report.status == cutoff::Status::Aborted
                                     ? "aborted"
                                     : "ok"));
  em.field("list_size", out.report.final_list_size);
  em.field("cutoff", out.report.final_cutoff);
  em.field("estimate", out.report.estimate);
  if (em.json && a.trace) em.trace(out.transcript);
  em.flush();
  return out.report.status == cutoff::Status::Aborted ? kExitAbort : kExitOk;
}

// -------------------------------------------------------------------- size

struct SizeArgs {
  std::string variant = "cvm2";
  double epsilon = 0.5;
  double delta = 0.1;
  std::uint64_t m = 1;
  std::uint64_t n = 0;  // 0 means unknown
  std::uint64_t f0 = 0;
  std::string format = "kv";
};

int cmd_size(const SizeArgs& a, bool json) {
  auto variant = parse_variant(a.variant, true);
  if (!variant) return usage_error("unknown variant " + a.variant);
  if (a.epsilon <= 0.0 || a.epsilon > 1.0)
    return usage_error("--epsilon must lie in (0, 1]");
  if (a.delta <= 0.0) return usage_error("--delta must be positive");
  if (a.m == 0) return usage_error("--m must be at least 1");

  cutoff::SizingParams p;
  p.epsilon = a.epsilon;
  p.delta = a.delta;
  p.m = a.m;
  p.n = a.n ? a.n : std::numeric_limits<std::uint64_t>::max();
  p.variant = *variant;
  cutoff::SizingResult res;
  try {
    res = cutoff::bucket_limit(p);
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }

  Emitter em;
  em.json = json;
  em.field("variant", std::string(cutoff::variant_name(*variant)));
  em.field("epsilon", a.epsilon);
  em.field("delta", a.delta);
  em.field("m", a.m);
  if (a.n) em.field("n", a.n);
  em.field("s", res.s);
  em.field("formula", res.formula);
  if (a.f0) {
    em.field("f0", a.f0);
    em.field("p0_exponent", std::uint64_t(res.p0_exponent(a.f0)));
    em.field("p0", res.p0(a.f0));
  }
  em.flush();
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

// Rejects keys outside `allowed` so config typos fail loudly.
bool check_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                const std::string& where, std::string& err) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok) {
      err = where + ": unknown key \"" + item.key() + "\"";
      return false;
    }
  }
  return true;
}

bool parse_stream_spec(const ordered_json& js, cutoff::StreamSpec& out,
                       std::string& err) {
  if (!js.is_object()) {
    err = "stream: expected an object";
    return false;
  }
  if (!js.contains("kind")) {
    err = "stream: missing \"kind\"";
    return false;
  }
  const std::string kind = js.at("kind").get<std::string>();
  try {
    if (kind == "all_distinct") {
      if (!check_keys(js, {"kind", "f0"}, "stream", err)) return false;
      out = cutoff::StreamSpec::all_distinct(js.at("f0").get<std::uint64_t>());
    } else if (kind == "repeated") {
      if (!check_keys(js, {"kind", "f0", "reps"}, "stream", err)) return false;
      out = cutoff::StreamSpec::repeated(js.at("f0").get<std::uint64_t>(),
                                         js.at("reps").get<std::uint64_t>());
    } else if (kind == "zipf") {
      if (!check_keys(js, {"kind", "f0", "m", "exponent"}, "stream", err))
        return false;
      out = cutoff::StreamSpec::zipf(js.at("f0").get<std::uint64_t>(),
                                     js.at("exponent").get<double>(),
                                     js.at("m").get<std::uint64_t>());
    } else if (kind == "permuted") {
      if (!check_keys(js, {"kind", "base", "permute_seed"}, "stream", err))
        return false;
      cutoff::StreamSpec base;
      if (!parse_stream_spec(js.at("base"), base, err)) return false;
      out = cutoff::StreamSpec::permuted(
          std::move(base), js.at("permute_seed").get<std::uint64_t>());
    } else {
      err = "stream: unknown kind \"" + kind + "\"";
      return false;
    }
  } catch (const std::exception& e) {
    err = std::string("stream: ") + e.what();
    return false;
  }
  return true;
}

int cmd_simulate(const std::string& config_path, bool json) {
  std::ifstream in(config_path);
  if (!in) return input_error("cannot open " + config_path);
  ordered_json js;
  try {
    js = ordered_json::parse(in);
  } catch (const std::exception& e) {
    return input_error(std::string("config: ") + e.what());
  }

  std::string err;
  if (!check_keys(js,
                  {"variant", "stream", "s", "epsilon", "delta", "trials",
                   "seed", "n"},
                  "config", err))
    return input_error(err);
  if (!js.contains("variant") || !js.contains("stream"))
    return input_error("config: \"variant\" and \"stream\" are required");

  cutoff::Experiment ex;
  try {
    auto variant = parse_variant(js.at("variant").get<std::string>(), true);
    if (!variant)
      return input_error("config: unknown variant \"" +
                         js.at("variant").get<std::string>() + "\"");
    ex.variant = *variant;
    if (!parse_stream_spec(js.at("stream"), ex.stream, err))
      return input_error(err);
    if (js.contains("s")) ex.s = js.at("s").get<std::uint64_t>();
    if (js.contains("epsilon")) ex.epsilon = js.at("epsilon").get<double>();
    if (js.contains("delta")) ex.delta = js.at("delta").get<double>();
    if (js.contains("trials")) ex.trials = js.at("trials").get<std::uint64_t>();
    if (js.contains("seed")) ex.seed = js.at("seed").get<std::uint64_t>();
    if (js.contains("n")) ex.n_cap = js.at("n").get<std::uint64_t>();
  } catch (const std::exception& e) {
    return input_error(std::string("config: ") + e.what());
  }
  if (ex.epsilon <= 0.0 || ex.epsilon > 1.0)
    return input_error("config: epsilon must lie in (0, 1]");
  if (ex.delta <= 0.0 || ex.delta > 1.0)
    return input_error("config: delta must lie in (0, 1]");
  if (ex.trials == 0) return input_error("config: trials must be at least 1");
  if (ex.s && *ex.s == 0) return input_error("config: s must be at least 1");

  cutoff::MonteCarloReport rep;
  try {
    rep = cutoff::monte_carlo(ex);
  } catch (const std::exception& e) {
    return input_error(std::string("simulate: ") + e.what());
  }

  Emitter em;
  em.json = json;
  em.field("variant", std::string(cutoff::variant_name(ex.variant)));
  em.field("trials", rep.trials);
  em.field("f0", rep.f0);
  em.field("s", rep.s);
  em.field("p0_exponent", std::uint64_t(rep.p0_exp));
  em.field("mean_estimate", rep.mean_estimate);
  em.field("standard_error", rep.standard_error);
  em.field("empirical_bias", rep.empirical_bias);
  em.field("failure_rate", rep.failure_rate);
  em.field("abort_rate", rep.abort_rate);
  em.field("p_small_rate", rep.p_small_rate);
  em.flush();
  return kExitOk;
}

// -------------------------------------------------------------------- sets

struct SetsArgs {
  std::string input;
  SizeFlags size;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;  // 0 derives the cuboid universe from the input
  std::uint64_t m = 0;  // 0 means "number of sets"
  std::string geo = "fast";
  bool trace = false;
  std::string format = "kv";
};

struct RawSetLine {
  std::uint64_t lineno = 0;
  bool is_range = false;
  std::uint64_t lo = 0, hi = 0;            // range form
  std::vector<cutoff::Interval> dims;      // cuboid form
};

int cmd_sets(const SetsArgs& a) {
  cutoff::GeoMode geo;
  if (a.geo == "debug")
    geo = cutoff::GeoMode::DebugScan;
  else if (a.geo == "fast")
    geo = cutoff::GeoMode::FastInversion;
  else
    return usage_error("--geo must be debug or fast");

  LineReader reader;
  std::string err;
  if (!reader.open(a.input, err)) return input_error(err);

  auto parse_u64 = [](const std::string& tok, std::uint64_t& out) {
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc{} && res.ptr == tok.data() + tok.size();
  };

  std::vector<RawSetLine> raw;
  std::size_t cuboid_dims = 0;
  std::string line;
  std::uint64_t lineno = 0;
  while (next_line(*reader.in, line)) {
    ++lineno;
    const std::string at = "line " + std::to_string(lineno);
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(std::move(t));
    if (toks.empty()) return input_error(at + ": empty set");

    RawSetLine r;
    r.lineno = lineno;
    if (toks[0] == "range") {
      if (toks.size() != 3)
        return input_error(at + ": range needs exactly two bounds");
      if (!parse_u64(toks[1], r.lo) || !parse_u64(toks[2], r.hi))
        return input_error(at + ": malformed bound");
      if (r.lo == 0 || r.lo > r.hi)
        return input_error(at + ": need 1 <= lo <= hi");
      r.is_range = true;
    } else if (toks[0] == "cuboid") {
      if (toks.size() < 3 || toks.size() % 2 == 0)
        return input_error(at + ": cuboid needs bound pairs a1 b1 a2 b2 ...");
      for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
        cutoff::Interval iv;
        if (!parse_u64(toks[i], iv.a) || !parse_u64(toks[i + 1], iv.b))
          return input_error(at + ": malformed bound");
        if (iv.a == 0 || iv.a > iv.b)
          return input_error(at + ": need 1 <= a <= b in every dimension");
        r.dims.push_back(iv);
      }
      if (cuboid_dims == 0)
        cuboid_dims = r.dims.size();
      else if (r.dims.size() != cuboid_dims)
        return input_error(at + ": cuboid dimensionality changed from " +
                           std::to_string(cuboid_dims) + " to " +
                           std::to_string(r.dims.size()));
    } else {
      return input_error(at + ": unknown set kind \"" + toks[0] + "\"");
    }
    raw.push_back(std::move(r));
  }

  const bool have_ranges =
      std::any_of(raw.begin(), raw.end(), [](auto& r) { return r.is_range; });
  if (have_ranges && cuboid_dims > 1)
    return input_error(
        "ranges cannot mix with cuboids of dimension above one");

  // Cuboid universe: explicit --n, else the largest upper bound seen.
  std::uint64_t universe = a.n;
  if (universe == 0)
    for (const auto& r : raw)
      for (const auto& iv : r.dims) universe = std::max(universe, iv.b);

  std::vector<cutoff::DelphicSet> sets;
  sets.reserve(raw.size());
  for (const auto& r : raw) {
    cutoff::DelphicSet s = r.is_range
                               ? cutoff::DelphicSet(cutoff::RangeSet{r.lo, r.hi})
                               : cutoff::DelphicSet(
                                     cutoff::CuboidSet{r.dims, universe});
    try {
      cutoff::validate_set(s);
    } catch (const std::exception& e) {
      return input_error("line " + std::to_string(r.lineno) + ": " + e.what());
    }
    sets.push_back(std::move(s));
  }

  const std::uint64_t m_cap = a.m ? a.m : sets.size();
  const std::uint64_t n_cap =
      a.n ? a.n : std::numeric_limits<std::uint64_t>::max();
  std::uint64_t s = 0;
  if (int rc = a.size.resolve(cutoff::Variant::Cvm2Refuse, false,
                              std::max<std::uint64_t>(1, m_cap), n_cap, s);
      rc != 0)
    return rc;

  cutoff::SetStreamConfig cfg;
  cfg.bucket_limit = s;
  cfg.seed = a.seed;
  cfg.geo = geo;
  cfg.trace = a.trace;
  cutoff::RunOutput out;
  try {
    out = cutoff::run_set_stream(cfg, sets, n_cap, m_cap);
  } catch (const std::exception& e) {
    return input_error(std::string("sets: ") + e.what());
  }

  Emitter em;
  em.json = a.format == "json";
  if (!em.json && a.trace) em.trace(out.transcript);
  em.field("s", s);
  em.field("seed", a.seed);
  em.field("geo", a.geo);
  em.field("sets", std::uint64_t(sets.size()));
  em.field("steps", out.report.steps_processed);
  em.field("list_size", out.report.final_list_size);
  em.field("cutoff", out.report.final_cutoff);
  em.field("estimate", out.report.estimate);
  if (em.json && a.trace) em.trace(out.transcript);
  em.flush();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming distinct-count estimation with cutoff sketches"};
  app.require_subcommand(1);

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate",
                                 "estimate distinct tokens in a line stream");
  est->add_option("--input", ea.input, "token file, one per line (- = stdin)");
  est->add_option("--variant", ea.variant,
                  "dond | dondp | cvm1 | cvm2 | cvm2refuse");
  ea.size.attach(est);
  est->add_option("--seed", ea.seed, "sketch seed");
  est->add_option("--n", ea.n, "universe-size cap for the fallback estimate");
  est->add_option("--m", ea.m, "stream-length bound used for sizing");
  est->add_flag("--tracking", ea.tracking,
                "size for per-prefix accuracy (cvm2refuse only)");
  est->add_flag("--trace", ea.trace, "print one line per step");
  est->add_option("--format", ea.format, "kv | json")
      ->check(CLI::IsMember({"kv", "json"}));

  SizeArgs za;
  auto* siz = app.add_subcommand("size", "evaluate bucket-limit formulas");
  siz->add_option("--variant", za.variant,
                  "dond | dondp | cvm1 | cvm2 | cvm2refuse | tracking");
  siz->add_option("--epsilon", za.epsilon, "target relative error");
  siz->add_option("--delta", za.delta, "target failure probability");
  siz->add_option("--m", za.m, "stream-length bound");
  siz->add_option("--n", za.n, "universe-size bound");
  siz->add_option("--f0", za.f0, "also report the cutoff guess p0 for this F0");
  siz->add_option("--format", za.format, "kv | json")
      ->check(CLI::IsMember({"kv", "json"}));

  std::string sim_config;
  std::string sim_format = "kv";
  auto* sim = app.add_subcommand("simulate", "Monte Carlo over generated streams");
  sim->add_option("--config", sim_config, "JSON experiment description")
      ->required();
  sim->add_option("--format", sim_format, "kv | json")
      ->check(CLI::IsMember({"kv", "json"}));

  SetsArgs sa;
  auto* set = app.add_subcommand("sets", "estimate a union of ranges/cuboids");
  set->add_option("--input", sa.input, "set file, one per line (- = stdin)");
  sa.size.attach(set);
  set->add_option("--seed", sa.seed, "sketch seed");
  set->add_option("--n", sa.n, "per-dimension universe bound");
  set->add_option("--m", sa.m, "set-count bound used for sizing");
  set->add_option("--geo", sa.geo, "debug | fast geometric sampling")
      ->check(CLI::IsMember({"debug", "fast"}));
  set->add_flag("--trace", sa.trace, "print one line per set");
  set->add_option("--format", sa.format, "kv | json")
      ->check(CLI::IsMember({"kv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (est->parsed()) return cmd_estimate(ea);
    if (siz->parsed()) return cmd_size(za, za.format == "json");
    if (sim->parsed()) return cmd_simulate(sim_config, sim_format == "json");
    if (set->parsed()) return cmd_sets(sa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}
