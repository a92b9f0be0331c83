#include "commands.hpp"

#include "markerlab/gibbs.hpp"
#include "markerlab/layers.hpp"
#include "markerlab/markers.hpp"
#include "markerlab/perturbation.hpp"
#include "markerlab/pi2.hpp"
#include "markerlab/robinson_io.hpp"
#include "markerlab/thermo.hpp"
#include "markerlab/turing.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace markerlab::cli {

namespace {

nlohmann::json read_json(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw UsageError(what + ": cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(what + ": '" + path + "' is not valid JSON: " + e.what());
  }
}

template <class F>
auto parse_field(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

/// Writes `content` to `path`, or to stdout when the path is empty or "-".
/// A resolved config lands next to every file output.
void emit(const CLI::App& sub, const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  write_file(path, content);
  std::string config = sub.config_to_str(true, false);
  std::istringstream lines(config);
  std::string line, kept;
  while (std::getline(lines, line))
    if (line.rfind("config=", 0) != 0) kept += line + '\n';
  write_file(path + ".ini", "# markerlab config v1\n[" + sub.get_name() + "]\n" + kept);
}

OdometerSchedule parse_schedule(const std::string& text) {
  if (text == "log" || text == "log2") return OdometerSchedule::logarithmic();
  if (text.rfind("const:", 0) == 0) {
    try {
      const int t = std::stoi(text.substr(6));
      if (t < 2) throw UsageError("schedule: constant must be >= 2");
      return OdometerSchedule::constant(t);
    } catch (const std::logic_error&) {
      throw UsageError("schedule: bad constant in '" + text + "'");
    }
  }
  throw UsageError("schedule: expected 'log' or 'const:<t>', got '" + text + "'");
}

Machine load_machine(const std::string& spec, const std::string& what) {
  if (spec.rfind("builtin:", 0) == 0) {
    const auto name = spec.substr(8);
    for (auto& m : corpus::all())
      if (m.name() == name) return m;
    if (name == "always-left") return corpus::always_left();
    throw UsageError(what + ": unknown built-in machine '" + name + "'");
  }
  const auto j = read_json(spec, what);
  return parse_field(what, [&] { return machine_from_json(j); });
}

Tileset load_tileset(const std::string& path) {
  if (path.empty()) return build_tileset();
  const auto j = read_json(path, "--tileset");
  return parse_field("--tileset", [&] { return tileset_from_json(j); });
}

Rational parse_rational_flag(const std::string& text, const std::string& what) {
  return parse_field(what, [&] { return parse_rational(text); });
}

std::string format_double(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

// ---------------------------------------------------------------------------

void add_render(CLI::App& app, int& status) {
  struct Opts {
    int scale = 2;
    int orientation = 0;
    int cell = 24;
    bool timestamp = false;
    std::string out;
    std::string patch_out;
    std::string tileset_out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("render", "Render an n-macro-tile of the Robinson tileset as SVG");
  sub->add_option("--scale", o->scale, "Macro-tile scale n (side 2^n - 1)")->check(CLI::Range(1, 10));
  sub->add_option("--orientation", o->orientation, "Quadrant orientation 0..3")->check(CLI::Range(0, 3));
  sub->add_option("--cell", o->cell, "Cell size in pixels")->check(CLI::Range(4, 256));
  sub->add_flag("--timestamp", o->timestamp, "Add a generation timestamp comment");
  sub->add_option("--out", o->out, "SVG output path");
  sub->add_option("--patch-json", o->patch_out, "Also write the patch as JSON");
  sub->add_option("--tileset-json", o->tileset_out, "Also write the tileset as JSON");
  sub->callback([o, sub, &status] {
    const Tileset ts = build_tileset();
    const auto macro = build_macro_tile(ts, o->scale, o->orientation);
    const auto violations = check_patch(ts, macro.patch);
    emit(*sub, o->out, render_svg(ts, macro.patch, {o->cell, o->timestamp}));
    if (!o->patch_out.empty()) write_file(o->patch_out, patch_to_json(macro.patch).dump(1) + "\n");
    if (!o->tileset_out.empty()) write_file(o->tileset_out, tileset_to_json(ts).dump(1) + "\n");
    if (!violations.empty()) {
      std::cerr << "render: " << violations.size() << " local-rule violations\n";
      status = InvariantFailure;
    }
  });
}

void add_verify_markers(CLI::App& app, int& status) {
  struct Opts {
    int scale = 1;
    std::string markers;
    std::string tileset;
    std::uint64_t budget = 2'000'000;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("verify-markers", "Check non-overlap and search for covering counterexamples");
  sub->add_option("--scale", o->scale, "Use the n-macro-tile marker set")->check(CLI::Range(1, 8));
  sub->add_option("--markers", o->markers, "Marker set JSON (overrides --scale)");
  sub->add_option("--tileset", o->tileset, "Tileset JSON (default: Robinson)");
  sub->add_option("--budget", o->budget, "Node budget for the covering search");
  sub->add_option("--out", o->out, "JSON report path");
  sub->callback([o, sub, &status] {
    const Tileset ts = load_tileset(o->tileset);
    const MarkerSet q = o->markers.empty()
                            ? macro_marker_set(ts, o->scale)
                            : parse_field("--markers", [&] { return marker_set_from_json(read_json(o->markers, "--markers")); });
    nlohmann::json report;
    report["ell"] = q.ell();
    report["tau"] = to_string(q.tau());
    report["window"] = q.window();
    report["admissible"] = q.admissible_in(ts);
    const auto overlap = verify_nonoverlap(q);
    if (overlap)
      report["nonoverlap"] = {{"status", "witness"},
                              {"u", overlap->u},
                              {"v", overlap->v},
                              {"shift", {overlap->shift.x, overlap->shift.y}}};
    else
      report["nonoverlap"] = {{"status", "ok"}};
    const auto cover = search_covering_counterexample(ts, q, o->budget);
    const char* names[] = {"covered", "witness", "budget_exceeded"};
    report["covering"] = {{"status", names[static_cast<int>(cover.status)]}, {"nodes", cover.nodes}};
    if (cover.witness) report["covering"]["witness"] = patch_to_json(*cover.witness);
    emit(*sub, o->out, report.dump(1) + "\n");
    if (overlap || cover.status == CoveringStatus::Witness || !report["admissible"].get<bool>())
      status = InvariantFailure;
    else if (cover.status == CoveringStatus::BudgetExceeded)
      status = Budget;
  });
}

void add_freq(CLI::App& app, int& status) {
  struct Opts {
    int kmax = 100;
    std::string schedule = "log";
    std::string threshold;
    std::string csv;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("freq", "Frozen-cell frequencies under an odometer schedule");
  sub->add_option("--kmax", o->kmax, "Largest scale")->check(CLI::Range(0, 10'000'000));
  sub->add_option("--schedule", o->schedule, "'log' or 'const:<t>'");
  sub->add_option("--threshold", o->threshold, "Report the first k with freq_k >= threshold (exact)");
  sub->add_option("--csv", o->csv, "CSV output path (k,t_k,freq_k)");
  sub->callback([o, sub, &status] {
    const auto t = parse_schedule(o->schedule);
    emit(*sub, o->csv, freq_frozen_csv(o->kmax, t));
    const auto table = freq_frozen_table(o->kmax, t);
    for (std::size_t k = 1; k < table.size(); ++k)
      if (table[k] < table[k - 1]) status = InvariantFailure;
    if (!o->threshold.empty()) {
      const auto hit = freq_crossing(parse_rational_flag(o->threshold, "--threshold"), t, o->kmax);
      std::cerr << "crossing: " << (hit ? std::to_string(*hit) : std::string("none")) << "\n";
    }
  });
}

void add_measure_flow(CLI::App& app, int& status) {
  struct Opts {
    std::string machine = "builtin:constant-up";
    std::string target;
    int depth = 1;
    int horizon = 32;
    int seed_cap = 16;
    std::string schedule = "log";
    bool repeat = false;
    std::string csv;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("measure-flow", "Conditional grid measures of a machine's word-measure flow");
  sub->add_option("--machine", o->machine, "Machine JSON or builtin:<name>");
  sub->add_option("--target", o->target, "Target machine for distances (default: the machine's own limit)");
  sub->add_option("--depth", o->depth, "Marginal depth l")->check(CLI::Range(1, 12));
  sub->add_option("--horizon", o->horizon, "Largest scale K")->check(CLI::Range(1, 100'000));
  sub->add_option("--seed-cap", o->seed_cap, "Largest scale enumerated exactly")->check(CLI::Range(3, 22));
  sub->add_option("--schedule", o->schedule, "'log' or 'const:<t>'");
  sub->add_flag("--dyadic-repeat", o->repeat, "Use m_(floor(log2 j)) at scale j");
  sub->add_option("--csv", o->csv, "CSV output path");
  sub->callback([o, sub, &status] {
    if (o->horizon < o->depth) throw UsageError("--horizon must be at least --depth");
    const MachineWordSource src(load_machine(o->machine, "--machine"), o->depth, o->seed_cap);
    const MachineWordSource tgt(o->target.empty() ? src.machine() : load_machine(o->target, "--target"), o->depth,
                                o->seed_cap);
    MeasureFlow flow;
    flow.t = parse_schedule(o->schedule);
    flow.first = o->depth;
    const int l = o->depth;
    flow.measure = [&src, l](int k) { return src.at(std::max(k, l)); };
    if (o->repeat) flow.measure = repetition_schedule(flow.measure);
    const WordMeasure target = tgt.at(o->horizon);
    std::ostringstream csv;
    csv << "k,defined,distance,residual";
    for (std::size_t w = 0; w < (std::size_t{1} << l); ++w) {
      std::vector<Bit> word(static_cast<std::size_t>(l));
      for (int i = 0; i < l; ++i) word[i] = ((w >> (l - 1 - i)) & 1) ? Bit::Down : Bit::Up;
      csv << ",p_" << word_string(word);
    }
    csv << "\n";
    ConditionalRecursion rec(l, flow);
    for (int k = l; k <= o->horizon; ++k) {
      const auto& c = rec.advance();
      Rational mass = c.residual;
      for (const auto& r : c.raw) mass += r;
      if (mass != 1) status = InvariantFailure;
      csv << k << ',' << (c.defined ? 1 : 0) << ','
          << (c.defined ? to_string(weak_star_distance(c.renormalized, target, l)) : std::string("1")) << ','
          << to_string(c.residual);
      for (const auto& w : c.renormalized.weights()) csv << ',' << to_string(w);
      csv << "\n";
    }
    emit(*sub, o->csv, csv.str());
  });
}

void add_thermo(CLI::App& app, int& status) {
  struct Opts {
    int kmin = 1;
    int kmax = 12;
    std::string c = "1";
    std::string cp = "1";
    int r = 2;
    std::string schedule = "log";
    double kappa_c = 1.0;
    std::string csv;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("thermo", "Temperature windows, overlaps and the entropy criterion");
  sub->add_option("--kmin", o->kmin)->check(CLI::Range(0, 14));
  sub->add_option("--kmax", o->kmax)->check(CLI::Range(0, 14));
  sub->add_option("--C", o->c, "Lower-window constant C > 0");
  sub->add_option("--Cp", o->cp, "Upper-window constant C' > 0");
  sub->add_option("--range", o->r, "Potential range r")->check(CLI::Range(1, 1000));
  sub->add_option("--schedule", o->schedule, "'log' or 'const:<t>'");
  sub->add_option("--kappa-c", o->kappa_c, "kappa_k = c / t_k");
  sub->add_option("--csv", o->csv, "CSV output path");
  sub->callback([o, sub, &status] {
    if (o->kmin > o->kmax) throw UsageError("--kmin must not exceed --kmax");
    const LogReal C(parse_rational_flag(o->c, "--C").get_d());
    const LogReal Cp(parse_rational_flag(o->cp, "--Cp").get_d());
    if (C <= 0 || Cp <= 0) throw UsageError("--C and --Cp must be positive");
    emit(*sub, o->csv, thermo_csv(o->kmin, o->kmax, C, Cp, o->r, parse_schedule(o->schedule), o->kappa_c));
    for (int k = o->kmin; k < o->kmax; ++k) {
      const auto a = temperature_window(k, C, Cp, o->r), b = temperature_window(k + 1, C, Cp, o->r);
      if (!(b.log2_beta_lo > a.log2_beta_lo) || !(b.log2_beta_hi > a.log2_beta_hi)) status = InvariantFailure;
    }
  });
}

void add_gibbs(CLI::App& app, int& status) {
  struct Opts {
    std::string tileset;
    std::string potential;
    std::string markers;
    int marker_scale = 0;
    int size = 8;
    double beta = 1.0;
    std::vector<double> betas;
    std::size_t replicas = 4;
    std::uint64_t steps = 10'000;
    std::uint64_t cadence = 100;
    std::uint64_t seed = 1;
    std::string csv;
    std::string sweep_csv;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("gibbs", "Metropolis sampling of a pattern-counting potential on a torus");
  sub->add_option("--tileset", o->tileset, "Tileset JSON (default: Robinson)");
  sub->add_option("--potential", o->potential, "Potential JSON (default: unit weight per mismatched pair)");
  sub->add_option("--markers", o->markers, "Marker set JSON for the coverage observable");
  sub->add_option("--marker-scale", o->marker_scale, "Use the n-macro-tile marker set")->check(CLI::Range(0, 6));
  sub->add_option("--size", o->size, "Torus side N")->check(CLI::Range(1, 4096));
  sub->add_option("--beta", o->beta, "Inverse temperature")->check(CLI::NonNegativeNumber);
  sub->add_option("--betas", o->betas, "Inverse temperatures for a coverage sweep");
  sub->add_option("--replicas", o->replicas, "Chains per beta in a sweep")->check(CLI::Range(1, 100'000));
  sub->add_option("--steps", o->steps, "Metropolis steps")->check(CLI::PositiveNumber);
  sub->add_option("--cadence", o->cadence, "Record every this many steps")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "RNG seed");
  sub->add_option("--csv", o->csv, "Trajectory CSV (step,energy,coverage)");
  sub->add_option("--sweep-csv", o->sweep_csv, "Sweep CSV (beta,mean,stderr,replicas)");
  sub->callback([o, sub, &status] {
    const Tileset ts = load_tileset(o->tileset);
    const Potential pot = o->potential.empty()
                              ? Potential::from_tileset(ts)
                              : parse_field("--potential", [&] { return potential_from_json(read_json(o->potential, "--potential")); });
    if (pot.range() >= o->size) throw UsageError("--size must exceed the potential range " + std::to_string(pot.range()));
    std::optional<MarkerSet> q;
    if (!o->markers.empty())
      q = parse_field("--markers", [&] { return marker_set_from_json(read_json(o->markers, "--markers")); });
    else if (o->marker_scale > 0)
      q = macro_marker_set(ts, o->marker_scale);
    if (q && q->ell() > o->size) throw UsageError("markers are larger than the torus");

    MetropolisOptions mo;
    mo.steps = o->steps;
    mo.cadence = o->cadence;
    mo.markers = q ? &*q : nullptr;
    const auto r = metropolis(ts.size(), pot, o->size, o->beta, o->seed, mo);
    std::ostringstream csv;
    csv << "# seed=" << o->seed << "\nstep,energy,coverage\n";
    for (std::size_t i = 0; i < r.step.size(); ++i)
      csv << r.step[i] << ',' << to_string(r.energy[i]) << ',' << (q ? format_double(r.coverage[i]) : std::string("")) << "\n";
    emit(*sub, o->csv, csv.str());
    const TorusConfig end(o->size, r.final_cells, pot, ts.size());
    if (end.energy() != r.final_energy) status = InvariantFailure;
    if (!o->betas.empty()) {
      if (!q) throw UsageError("a coverage sweep needs --markers or --marker-scale");
      const auto rows = coverage_sweep(ts.size(), pot, *q, o->size, o->betas, o->steps, o->replicas, o->seed);
      std::ostringstream s;
      s << "# seed=" << o->seed << "\nbeta,mean,stderr,replicas\n";
      for (const auto& row : rows)
        s << format_double(row.beta) << ',' << format_double(row.mean) << ',' << format_double(row.stderr_) << ','
          << row.replicas << "\n";
      if (o->sweep_csv.empty()) std::cout << s.str();
      else write_file(o->sweep_csv, s.str());
    }
  });
}

void add_perturb(CLI::App& app, int& status) {
  struct Opts {
    std::string base = "builtin:constant-up";
    std::string target = "builtin:constant-down";
    std::size_t index = 1;
    std::string epsilon = "0";
    int depth = 1;
    int horizon = 48;
    int window = 16;
    std::string resolution = "1/256";
    int seed_cap = 16;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("perturb", "Selector perturbation: flows for phi_X + eps psi_Y");
  sub->add_option("--base", o->base, "M_X: machine JSON or builtin:<name>");
  sub->add_option("--target", o->target, "M_Y: machine JSON or builtin:<name>");
  sub->add_option("--index", o->index, "Enumeration index i taken by M_Y")->check(CLI::PositiveNumber);
  sub->add_option("--epsilon", o->epsilon, "Perturbation strength (>= 0)");
  sub->add_option("--depth", o->depth, "Marginal depth l")->check(CLI::Range(1, 8));
  sub->add_option("--horizon", o->horizon, "Largest scale K")->check(CLI::Range(1, 100'000));
  sub->add_option("--window", o->window, "Tail length for the accumulation report")->check(CLI::Range(0, 100'000));
  sub->add_option("--resolution", o->resolution, "Net resolution");
  sub->add_option("--seed-cap", o->seed_cap, "Largest scale enumerated exactly")->check(CLI::Range(3, 22));
  sub->add_option("--out", o->out, "JSON report path (epsilon-free body)");
  sub->callback([o, sub, &status] {
    const Rational eps = parse_rational_flag(o->epsilon, "--epsilon");
    if (eps < 0) throw UsageError("--epsilon must be non-negative");
    PerturbationConfig cfg;
    cfg.l = o->depth;
    cfg.K = o->horizon;
    cfg.window = o->window;
    cfg.resolution = parse_rational_flag(o->resolution, "--resolution");
    cfg.seed_cap = o->seed_cap;
    const auto enumeration = enumeration_v1();
    if (o->index > enumeration.size())
      throw UsageError("--index must lie in 1.." + std::to_string(enumeration.size()));
    if (cfg.window > cfg.K - cfg.l) throw UsageError("--window must not exceed --horizon minus --depth");
    const auto rep = perturbed_flow(load_machine(o->base, "--base"), load_machine(o->target, "--target"), o->index, eps,
                                    cfg, enumeration);
    emit(*sub, o->out, report_body_json(rep).dump(1) + "\n");
    (void)status;
  });
}

void add_acc(CLI::App& app, int& status) {
  struct Opts {
    std::string sequence;
    std::string builtin = "alternating";
    std::uint64_t horizon = 1024;
    std::string resolution = "1/64";
    bool connect = false;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("acc", "Finite-horizon accumulation set of a computable sequence");
  sub->add_option("--sequence", o->sequence, "Sequence descriptor JSON");
  sub->add_option("--builtin", o->builtin, "constant | alternating | sweep (between point masses u and d)");
  sub->add_option("--horizon", o->horizon, "Horizon N; the tail is [N/2, N]")->check(CLI::Range(1, 10'000'000));
  sub->add_option("--resolution", o->resolution, "Net resolution");
  sub->add_flag("--connectify", o->connect, "Connectify the sequence first");
  sub->add_option("--out", o->out, "JSON report path");
  sub->callback([o, sub, &status] {
    ComputableSequence seq;
    if (!o->sequence.empty()) {
      seq = parse_field("--sequence", [&] { return sequence_from_json(read_json(o->sequence, "--sequence")); });
    } else {
      const DyadicMeasure up(WordMeasure::point_mass({Bit::Up})), down(WordMeasure::point_mass({Bit::Down}));
      if (o->builtin == "constant") seq = sequences::constant(up);
      else if (o->builtin == "alternating") seq = sequences::alternating(up, down);
      else if (o->builtin == "sweep") seq = sequences::dyadic_sweep(up, down);
      else throw UsageError("--builtin: unknown sequence '" + o->builtin + "'");
    }
    if (o->connect) seq = connectify(seq);
    const Rational res = parse_rational_flag(o->resolution, "--resolution");
    if (res <= 0) throw UsageError("--resolution must be positive");
    const auto a = finite_accumulation(seq, o->horizon, res);
    if (a.hausdorff > res) status = InvariantFailure;
    emit(*sub, o->out, accumulation_set_to_json(a).dump(1) + "\n");
  });
}

}  // namespace

void register_commands(CLI::App& app, int& status) {
  add_render(app, status);
  add_verify_markers(app, status);
  add_freq(app, status);
  add_measure_flow(app, status);
  add_thermo(app, status);
  add_gibbs(app, status);
  add_perturb(app, status);
  add_acc(app, status);
  for (auto* sub : app.get_subcommands({})) sub->configurable();
}

}  // namespace markerlab::cli
