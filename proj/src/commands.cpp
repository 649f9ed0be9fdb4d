#include "skewlin/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <complex>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "skewlin/cantor.hpp"
#include "skewlin/flat.hpp"
#include "skewlin/formal.hpp"
#include "skewlin/variation.hpp"

namespace skewlin {

namespace {

using json = nlohmann::ordered_json;

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  std::size_t size() const { return rows_.size(); }

  std::string render() const {
    std::ostringstream os;
    write_row(os, header_);
    for (const auto& r : rows_) write_row(os, r);
    return os.str();
  }

 private:
  static void write_row(std::ostream& os, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) os << ',';
      const bool quote = row[i].find_first_of(",\"") != std::string::npos;
      if (!quote) {
        os << row[i];
        continue;
      }
      os << '"';
      for (char c : row[i]) os << (c == '"' ? "\"\"" : std::string(1, c));
      os << '"';
    }
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Files collected during a run and written together at the end.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& name, std::string content) { files.emplace_back(name, std::move(content)); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& f : files) out.push_back(f.first);
    return out;
  }

  void write(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files) {
      std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
      if (!f) throw InvalidArgument("cannot write " + (std::filesystem::path(dir) / name).string());
      f << content;
    }
  }
};

std::string word_key(const SymbolicBase& base, std::span<const int> w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0) out += ' ';
    out += base.labels()[static_cast<std::size_t>(w[i])];
  }
  return out;
}

std::string index_text(const MultiIndex& k) {
  std::string out;
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (j > 0) out += ' ';
    out += std::to_string(k[j]);
  }
  return out;
}

std::vector<std::string> coordinate_header(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

template <class S>
void append_coordinates(std::vector<std::string>& row, const std::vector<S>& x) {
  for (const auto& v : x) row.push_back(format_scalar(v));
}

json hypotheses_json(const HypothesisReport& h) {
  json out;
  out["passed"] = h.h2.pass && h.h3.pass && h.h4_minimal_r.has_value();
  out["h1"] = {{"pass", h.h1.pass},
               {"advisory", true},
               {"sup_derivative", h.h1.sup_derivative},
               {"containment_margin", h.h1.containment_margin},
               {"samples", h.h1.samples},
               {"worst_window", h.h1.worst_window}};
  out["h2"] = {{"pass", h.h2.pass}};
  if (!h.h2.pass) {
    out["h2"]["window"] = h.h2.window;
    out["h2"]["row"] = h.h2.row + 1;
    out["h2"]["col"] = h.h2.col + 1;
    out["h2"]["magnitude"] = h.h2.magnitude;
  }
  out["h3"] = {{"pass", h.h3.pass}};
  if (h.h3.witness) {
    const auto& w = *h.h3.witness;
    out["h3"]["witness"] = {{"i", w.component + 1},
                            {"k", w.k.entries()},
                            {"equality", w.equality},
                            {"window_a", w.window_a},
                            {"difference_a", w.difference_a},
                            {"window_b", w.window_b},
                            {"difference_b", w.difference_b}};
  }
  out["h4_minimal_r"] = h.h4_minimal_r ? json(*h.h4_minimal_r) : json(nullptr);
  out["mu"] = h.mu;
  out["Lambda"] = h.Lambda;
  return out;
}

FlatOptions flat_options(const RunConfig& c) {
  FlatOptions o;
  o.degree = c.params.degree;
  o.max_degree = c.params.max_degree;
  o.tol = c.params.tol;
  o.samples = c.params.samples;
  o.delta = c.params.delta;
  return o;
}

const SystemConfig& need_system(const RunConfig& c) {
  if (!c.system) throw InvalidArgument("this command needs a system section");
  return *c.system;
}

const ModelConfig& need_model(const RunConfig& c) {
  if (!c.model) throw InvalidArgument("this command needs a model section");
  return *c.model;
}

int hypothesis_degree(const HypothesisReport& report, const RunConfig& c) {
  if (!report.h2.pass || !report.h3.pass || !report.h4_minimal_r) throw HypothesisError(report.describe());
  const int r = c.params.degree.value_or(*report.h4_minimal_r);
  if (r < *report.h4_minimal_r)
    throw HypothesisError("degree " + std::to_string(r) + " is below the minimal r = " +
                          std::to_string(*report.h4_minimal_r) + " of (H4)");
  return r;
}

template <class S>
Table coefficient_table(const BasePtr& base, const CylinderFunction<JetMap<S>>& jets) {
  Table t({"window", "component", "multiindex", "order", "coefficient", "taylor"});
  for (std::size_t w = 0; w < jets.size(); ++w) {
    const auto& j = jets[w];
    const std::string key = word_key(*base, jets.window(w));
    for (std::size_t i = 0; i < j.dimension(); ++i)
      for (std::size_t rank = 1; rank < j.index_set().size(); ++rank) {
        const auto& k = j.index_set().at(rank);
        t.add({key, std::to_string(i + 1), index_text(k), std::to_string(k.order()), format_scalar(j.monomial(i, k)),
               format_scalar(j.taylor(i, rank))});
      }
  }
  return t;
}

template <class S>
double max_imaginary(const CylinderFunction<JetMap<S>>& jets) {
  double out = 0.0;
  if constexpr (ScalarTraits<S>::complex)
    for (const auto& j : jets.values())
      for (const auto& v : j.raw()) out = std::max(out, std::abs(std::imag(v)));
  return out;
}

template <class S>
json defect_section(LinearizationResult<S>& lin, const RunConfig& c, Outputs& files) {
  DefectGrid grid;
  grid.points = c.params.points;
  grid.seed = c.params.seed;
  const auto report = defect_report(lin, grid);
  const std::size_t n = lin.system.dimension();
  std::vector<std::string> header{"window"};
  for (auto& h : coordinate_header("x", n)) header.push_back(h);
  for (auto& h : coordinate_header("h", n)) header.push_back(h);
  for (const char* h : {"defect", "observed_rate", "iterations"}) header.emplace_back(h);
  Table t(header);
  for (const auto& row : report.rows) {
    std::vector<std::string> r{row.window};
    append_coordinates(r, row.x);
    append_coordinates(r, row.h);
    r.push_back(format_real(row.defect));
    r.push_back(format_real(row.observed_rate));
    r.push_back(std::to_string(row.iterations));
    t.add(std::move(r));
  }
  files.add("defect.csv", t.render());
  return {{"points", report.rows.size()},
          {"sup_defect", report.sup_defect},
          {"empirical_rate", report.empirical_rate},
          {"certified_rate", report.certified_rate}};
}

template <class S>
json linearization_json(const LinearizationResult<S>& lin) {
  return {{"degree", lin.degree},
          {"delta", lin.delta},
          {"rate", lin.rate},
          {"operator_rate", lin.operator_rate},
          {"padding", lin.padding},
          {"formal_residual", lin.formal.residual},
          {"truncation_bound", lin.formal.truncation_bound}};
}

template <class S>
void run_linearize(const RunConfig& c, json& summary, Outputs& files, std::ostream& out) {
  const auto& cfg = need_system(c);
  const auto base = build_base(cfg.base);
  const auto sys = build_system<S>(cfg, base);
  const auto report = check_hypotheses(sys, c.params.max_degree, c.params.samples);
  summary["hypotheses"] = hypotheses_json(report);
  hypothesis_degree(report, c);
  auto lin = linearize(sys, flat_options(c));
  files.add("coefficients.csv", coefficient_table(base, lin.formal.jets).render());
  summary["linearization"] = linearization_json(lin);
  if constexpr (ScalarTraits<S>::complex) summary["max_imaginary_coefficient"] = max_imaginary(lin.formal.jets);
  summary["defect"] = defect_section(lin, c, files);
  out << "degree r = " << lin.degree << ", delta = " << format_real(lin.delta) << ", rate = " << format_real(lin.rate)
      << "\n";
  out << "sup defect over " << c.params.points << " points = " << format_real(lin.diagnostics) << "\n";
}

void run_linearize_rational(const RunConfig& c, json& summary, Outputs& files, std::ostream& out) {
  const auto& cfg = need_system(c);
  const auto base = build_base(cfg.base);
  const auto exact = build_system<mpq_class>(cfg, base);
  const auto report = check_hypotheses(exact, c.params.max_degree, c.params.samples);
  summary["hypotheses"] = hypotheses_json(report);
  const int r = hypothesis_degree(report, c);
  FormalOptions fo;
  fo.tol = c.params.tol;
  const auto formal = solve_formal(exact, r, fo);
  files.add("coefficients.csv", coefficient_table(base, formal.jets).render());
  summary["formal_exact"] = true;
  summary["formal_residual"] = formal.residual;

  auto opts = flat_options(c);
  opts.degree = r;
  auto lin = linearize(build_system<double>(cfg, base), opts);
  summary["linearization"] = linearization_json(lin);
  summary["defect"] = defect_section(lin, c, files);
  out << "exact formal stage at r = " << r << ", residual " << format_real(formal.residual) << "\n";
  out << "sup defect over " << c.params.points << " points = " << format_real(lin.diagnostics) << "\n";
}

template <class S>
HypothesisReport check_in_field(const RunConfig& c) {
  const auto& cfg = need_system(c);
  return check_hypotheses(build_system<S>(cfg, build_base(cfg.base)), c.params.max_degree, c.params.samples);
}

int run_check(const RunConfig& c, json& summary, std::ostream& out) {
  HypothesisReport report;
  switch (c.field) {
    case Field::real: report = check_in_field<double>(c); break;
    case Field::complex: report = check_in_field<std::complex<double>>(c); break;
    case Field::rational: report = check_in_field<mpq_class>(c); break;
  }
  out << report.describe();
  summary["hypotheses"] = hypotheses_json(report);
  bool pass = report.h2.pass && report.h3.pass && report.h4_minimal_r.has_value();
  if (pass && c.params.degree && *c.params.degree < *report.h4_minimal_r) {
    out << "degree " << *c.params.degree << " is below the minimal r\n";
    pass = false;
  }
  summary["passed"] = pass;
  return pass ? kExitSuccess : kExitHypothesis;
}

void run_cantor(const RunConfig& c, json& summary, Outputs& files, std::ostream& out) {
  const auto& cfg = need_model(c);
  const auto model = build_model(cfg);
  const double s = parse_real(cfg.scale);
  const int depth = c.params.depth;
  const std::size_t n = model.dimension;
  const double tol = std::min(c.params.tol, 1e-13);

  const auto cloud = sample_attractor(model, depth);
  std::vector<std::string> header{"word"};
  for (auto& h : coordinate_header("x", n)) header.push_back(h);
  Table attractor(header);
  for (const auto& [word, x] : cloud) {
    std::vector<std::string> r{word};
    append_coordinates(r, x);
    attractor.add(std::move(r));
  }
  files.add("attractor.csv", attractor.render());

  const auto frame = compute_splitting(model, depth, tol);
  header = {"window", "i"};
  for (auto& h : coordinate_header("u", n)) header.push_back(h);
  header.emplace_back("factor");
  header.emplace_back("residual");
  Table splitting(header);
  for (std::size_t w = 0; w < frame.windows.size(); ++w)
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> r{frame.windows[w], std::to_string(i + 1)};
      append_coordinates(r, frame.vectors[w][i]);
      r.push_back(format_real(frame.factors[w][i]));
      r.push_back(format_real(frame.residuals[w]));
      splitting.add(std::move(r));
    }
  files.add("splitting.csv", splitting.render());

  const auto charts = build_charts(model, depth, s, flat_options(c), tol);
  const auto defects = chart_defects(model, charts, c.params.points, c.params.seed);
  header = {"window"};
  for (auto& h : coordinate_header("v", n)) header.push_back(h);
  header.emplace_back("defect");
  Table chart_table(header);
  double sup = 0.0;
  for (const auto& d : defects) {
    std::vector<std::string> r{d.window};
    append_coordinates(r, d.v);
    r.push_back(format_real(d.defect));
    chart_table.add(std::move(r));
    sup = std::max(sup, d.defect);
  }
  files.add("charts.csv", chart_table.render());

  summary["attractor_points"] = cloud.size();
  summary["splitting"] = {{"windows", frame.windows.size()},
                          {"iterations", frame.iterations},
                          {"max_residual", frame.max_residual},
                          {"min_gap", frame.min_gap},
                          {"min_det", frame.min_det}};
  summary["charts"] = {{"scale", s}, {"radius", charts.radius}, {"samples", defects.size()}, {"sup_defect", sup}};
  out << cloud.size() << " attractor points, splitting residual " << format_real(frame.max_residual)
      << ", chart defect " << format_real(sup) << "\n";
}

void run_continue(const RunConfig& c, json& summary, Outputs& files, std::ostream& out) {
  const auto& cfg = need_model(c);
  const auto model = build_model(cfg);
  const auto result = continue_hyperbolic(model, build_perturbation(cfg, model), c.params.depth,
                                          std::min(c.params.tol, 1e-14));
  const std::size_t n = model.dimension;
  std::vector<std::string> header{"window"};
  for (auto& h : coordinate_header("x", n)) header.push_back(h);
  for (auto& h : coordinate_header("psi", n)) header.push_back(h);
  Table t(header);
  for (std::size_t i = 0; i < result.windows.size(); ++i) {
    std::vector<std::string> r{result.windows[i]};
    append_coordinates(r, result.original[i]);
    append_coordinates(r, result.continued[i]);
    t.add(std::move(r));
  }
  files.add("continuation.csv", t.render());
  summary["samples"] = result.windows.size();
  summary["residual"] = result.residual;
  summary["iterations"] = result.iterations;
  summary["observed_contraction"] = result.observed_contraction;
  out << result.windows.size() << " samples, semi-conjugacy residual " << format_real(result.residual) << "\n";
}

template <class S>
void run_derivative(const RunConfig& c, json& summary, Outputs& files, std::ostream& out) {
  const auto& cfg = need_system(c);
  const auto base = build_base(cfg.base);
  const auto sys = build_system<S>(cfg, base);
  const auto dir = build_direction<S>(cfg, c.direction, base, c.params.alpha);
  const auto report = check_hypotheses(sys, c.params.max_degree, c.params.samples);
  summary["hypotheses"] = hypotheses_json(report);
  const int r = hypothesis_degree(report, c);
  FormalOptions fo;
  fo.tol = std::min(c.params.tol, 1e-13);
  const auto analytic = coefficient_derivative(sys, dir, r, fo);
  const auto fd = coefficient_finite_difference(sys, dir, r, c.params.step, fo);
  const int depth = std::max(analytic.jets.depth(), fd.depth());
  const auto a = analytic.jets.refined(depth);
  const auto b = fd.refined(depth);

  Table t({"window", "component", "multiindex", "analytic", "finite_difference", "abs_error", "rel_error",
           "analytic_taylor", "finite_difference_taylor"});
  double max_rel = 0.0;
  double max_abs = 0.0;
  for (std::size_t w = 0; w < a.size(); ++w) {
    const std::string key = word_key(*base, a.window(w));
    const auto& ja = a[w];
    for (std::size_t i = 0; i < ja.dimension(); ++i)
      for (std::size_t rank = ja.index_set().order_begin(2); rank < ja.index_set().size(); ++rank) {
        const auto& k = ja.index_set().at(rank);
        const S va = ja.monomial(i, k);
        const S vb = b[w].monomial(i, k);
        const double abs_err = magnitude(S(va - vb));
        const double scale = std::max(magnitude(va), magnitude(vb));
        const double rel = scale < 1e-14 ? abs_err : abs_err / scale;
        max_rel = std::max(max_rel, rel);
        max_abs = std::max(max_abs, abs_err);
        t.add({key, std::to_string(i + 1), index_text(k), format_scalar(va), format_scalar(vb), format_real(abs_err),
               format_real(rel), format_scalar(ja.taylor(i, rank)), format_scalar(b[w].taylor(i, rank))});
      }
  }
  files.add("derivative.csv", t.render());
  summary["degree"] = r;
  summary["alpha"] = c.params.alpha;
  summary["step"] = c.params.step;
  summary["rows"] = t.size();
  summary["max_abs_error"] = max_abs;
  summary["max_rel_error"] = max_rel;
  out << "degree r = " << r << ", max relative error vs finite differences " << format_real(max_rel) << "\n";
}

int dispatch(const std::string& command, const RunConfig& c, json& summary, Outputs& files, std::ostream& out) {
  if (command == "check") return run_check(c, summary, out);
  if (command == "linearize") {
    switch (c.field) {
      case Field::real: run_linearize<double>(c, summary, files, out); break;
      case Field::complex: run_linearize<std::complex<double>>(c, summary, files, out); break;
      case Field::rational: run_linearize_rational(c, summary, files, out); break;
    }
    return kExitSuccess;
  }
  if (command == "cantor") {
    run_cantor(c, summary, files, out);
    return kExitSuccess;
  }
  if (command == "continue") {
    run_continue(c, summary, files, out);
    return kExitSuccess;
  }
  if (command == "derivative") {
    if (c.field == Field::complex)
      run_derivative<std::complex<double>>(c, summary, files, out);
    else
      run_derivative<double>(c, summary, files, out);
    return kExitSuccess;
  }
  throw InvalidArgument("unknown command '" + command + "'");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"check", "linearize", "cantor", "continue", "derivative"};
  return names;
}

int run_command(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& err) {
  json summary;
  summary["command"] = command;
  summary["field"] = to_string(config.field);
  summary["seed"] = config.params.seed;
  Outputs files;
  int code = kExitSuccess;
  try {
    code = dispatch(command, config, summary, files, out);
  } catch (const HypothesisError& e) {
    err << "hypothesis failure:\n" << e.what() << "\n";
    summary["error"] = {{"kind", "hypothesis"}, {"message", e.what()}};
    code = kExitHypothesis;
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << "\n";
    summary["error"] = {{"kind", "convergence"}, {"message", e.what()}, {"achieved", e.achieved()}};
    code = kExitConvergence;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    summary["error"] = {{"kind", "usage"}, {"message", e.what()}};
    code = kExitUsage;
  }
  summary["exit_code"] = code;
  auto names = files.names();
  names.emplace_back("summary.json");
  summary["files"] = names;
  files.add("summary.json", summary.dump(2) + "\n");
  try {
    files.write(config.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return code;
}

}  // namespace skewlin
