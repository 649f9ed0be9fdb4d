#include "skewlin/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>

namespace skewlin {

std::complex<double> parse_complex(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw InvalidArgument("empty number");
  if (s.back() != 'i') return {parse_real(s), 0.0};
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;)
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E' && s[k - 1] != '/') {
      split = k;
      break;
    }
  const std::string re = split == std::string::npos ? "0" : s.substr(0, split);
  std::string im = split == std::string::npos ? s : s.substr(split);
  if (im.empty() || im == "+") im = "1";
  if (im == "-") im = "-1";
  return {parse_real(re), parse_real(im)};
}

template <>
double parse_scalar<double>(std::string_view text) {
  return parse_real(text);
}

template <>
std::complex<double> parse_scalar<std::complex<double>>(std::string_view text) {
  return parse_complex(text);
}

template <>
mpq_class parse_scalar<mpq_class>(std::string_view text) {
  return parse_rational(text);
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    const auto mark = node.Mark();
    std::ostringstream os;
    os << source_ << ':' << (mark.line + 1) << ':' << (mark.column + 1) << ": " << message;
    throw ConfigError(os.str());
  }

  void expect_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
  }

  void expect_list(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, what + " must be a list");
  }

  void check_keys(const YAML::Node& node, const std::string& what, std::initializer_list<const char*> keys) const {
    expect_map(node, what);
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
        fail(kv.first, "unknown key '" + key + "' in " + what);
    }
  }

  std::string text(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a scalar");
    return node.Scalar();
  }

  long integer(const YAML::Node& node, const std::string& what) const {
    const std::string s = text(node, what);
    try {
      std::size_t used = 0;
      const long v = std::stol(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(node, what + " must be an integer, got '" + s + "'");
  }

  long non_negative(const YAML::Node& node, const std::string& what) const {
    const long v = integer(node, what);
    if (v < 0) fail(node, what + " must be non-negative");
    return v;
  }

  double real(const YAML::Node& node, const std::string& what) const {
    const std::string s = text(node, what);
    try {
      return parse_real(s);
    } catch (const InvalidArgument& e) {
      fail(node, what + ": " + e.what());
    }
  }

  /// Coefficient text, checked against the field.
  std::string number(const YAML::Node& node, const std::string& what, Field field) const {
    std::string s = text(node, what);
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    try {
      if (field == Field::complex)
        parse_complex(s);
      else
        parse_rational(s);
    } catch (const InvalidArgument& e) {
      fail(node, what + ": " + e.what());
    }
    return s;
  }

  std::vector<std::string> numbers(const YAML::Node& node, const std::string& what, Field field) const {
    expect_list(node, what);
    std::vector<std::string> out;
    for (const auto& v : node) out.push_back(number(v, what, field));
    return out;
  }

  std::vector<int> ints(const YAML::Node& node, const std::string& what) const {
    expect_list(node, what);
    std::vector<int> out;
    for (const auto& v : node) out.push_back(static_cast<int>(integer(v, what)));
    return out;
  }

  std::vector<std::vector<int>> int_matrix(const YAML::Node& node, const std::string& what) const {
    expect_list(node, what);
    std::vector<std::vector<int>> out;
    for (const auto& row : node) out.push_back(ints(row, what + " row"));
    return out;
  }

  std::vector<TermConfig> terms(const YAML::Node& node, Field field, std::size_t n) const {
    expect_list(node, "terms");
    std::vector<TermConfig> out;
    for (const auto& t : node) {
      if (!t.IsSequence() || t.size() != 3) fail(t, "a term is [component, [k_1, ..., k_n], coefficient]");
      TermConfig term;
      const long comp = integer(t[0], "term component");
      if (comp < 1 || static_cast<std::size_t>(comp) > n)
        fail(t[0], "term component must lie in 1.." + std::to_string(n));
      term.component = static_cast<std::size_t>(comp - 1);
      term.index = ints(t[1], "term multiindex");
      if (term.index.size() != n) fail(t[1], "multiindex needs " + std::to_string(n) + " entries");
      int order = 0;
      for (int k : term.index) {
        if (k < 0) fail(t[1], "multiindex entries must be non-negative");
        order += k;
      }
      if (order == 0) fail(t[1], "constant terms are not allowed: fibers fix the origin");
      term.value = number(t[2], "term coefficient", field);
      out.push_back(std::move(term));
    }
    return out;
  }

 private:
  std::string source_;
};

std::string normalize_key(const std::string& key) {
  std::istringstream is(key);
  std::string word;
  std::string out;
  while (is >> word) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::string window_key(const SymbolicBase& base, std::span<const int> w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0) out += ' ';
    out += base.labels()[static_cast<std::size_t>(w[i])];
  }
  return out;
}

BaseConfig read_base(const Reader& rd, const YAML::Node& node) {
  rd.check_keys(node, "base", {"kind", "sigma", "length", "alphabet", "transitions", "labels"});
  BaseConfig b;
  if (node["kind"]) b.kind = rd.text(node["kind"], "base kind");
  if (b.kind != "finite" && b.kind != "cycle" && b.kind != "full_shift" && b.kind != "sft")
    rd.fail(node["kind"], "base kind must be finite, cycle, full_shift or sft");
  if (node["sigma"]) b.sigma = rd.ints(node["sigma"], "sigma");
  if (node["length"]) b.length = static_cast<std::size_t>(rd.non_negative(node["length"], "length"));
  if (node["alphabet"]) b.alphabet = static_cast<std::size_t>(rd.non_negative(node["alphabet"], "alphabet"));
  if (node["transitions"]) b.transitions = rd.int_matrix(node["transitions"], "transitions");
  if (node["labels"]) {
    rd.expect_list(node["labels"], "labels");
    for (const auto& l : node["labels"]) b.labels.push_back(rd.text(l, "label"));
  }
  try {
    build_base(b);
  } catch (const InvalidArgument& e) {
    rd.fail(node, std::string("invalid base: ") + e.what());
  }
  return b;
}

std::vector<FiberConfig> read_fibers(const Reader& rd, const YAML::Node& node, Field field, std::size_t& n,
                                   const std::string& what) {
  rd.expect_map(node, what);
  std::vector<FiberConfig> out;
  for (const auto& kv : node) {
    FiberConfig f;
    f.key = normalize_key(kv.first.as<std::string>());
    rd.check_keys(kv.second, "fiber '" + f.key + "'", {"lambda", "terms"});
    if (!kv.second["lambda"]) rd.fail(kv.second, "fiber '" + f.key + "' needs lambda");
    f.lambda = rd.numbers(kv.second["lambda"], "lambda", field);
    if (n == 0) n = f.lambda.size();
    if (f.lambda.size() != n || n == 0)
      rd.fail(kv.second["lambda"], "lambda needs " + std::to_string(n) + " entries");
    if (kv.second["terms"]) f.terms = rd.terms(kv.second["terms"], field, n);
    if (std::any_of(out.begin(), out.end(), [&](const FiberConfig& g) { return g.key == f.key; }))
      rd.fail(kv.first, "duplicate fiber '" + f.key + "'");
    out.push_back(std::move(f));
  }
  return out;
}

/// Every key names a window of the table; with `complete`, every window has a key.
void check_windows(const Reader& rd, const YAML::Node& node, const SystemConfig& cfg, const std::vector<FiberConfig>& fibers,
                   bool complete) {
  const auto base = build_base(cfg.base);
  const auto& ws = base->windows(base->is_finite() ? 0 : cfg.depth);
  std::set<std::string> keys;
  for (std::size_t i = 0; i < ws.size(); ++i) keys.insert(window_key(*base, ws.word(i)));
  for (const auto& kv : node)
    if (!keys.count(normalize_key(kv.first.as<std::string>())))
      rd.fail(kv.first, "'" + kv.first.as<std::string>() + "' is not a point or admissible window of depth " +
                            std::to_string(cfg.depth));
  if (!complete) return;
  for (const auto& k : keys)
    if (std::none_of(fibers.begin(), fibers.end(), [&](const FiberConfig& f) { return f.key == k; }))
      rd.fail(node, "no fiber for '" + k + "'");
}

SystemConfig read_system(const Reader& rd, const YAML::Node& node, Field field) {
  rd.check_keys(node, "system", {"base", "dimension", "depth", "fibers"});
  SystemConfig s;
  if (!node["base"]) rd.fail(node, "system needs a base");
  s.base = read_base(rd, node["base"]);
  if (node["depth"]) s.depth = static_cast<int>(rd.non_negative(node["depth"], "depth"));
  if (node["dimension"]) s.dimension = static_cast<std::size_t>(rd.non_negative(node["dimension"], "dimension"));
  if (!node["fibers"]) rd.fail(node, "system needs fibers");
  s.fibers = read_fibers(rd, node["fibers"], field, s.dimension, "fibers");
  check_windows(rd, node["fibers"], s, s.fibers, true);
  return s;
}

BranchConfig read_branch(const Reader& rd, const YAML::Node& node, std::size_t& n) {
  rd.check_keys(node, "branch", {"label", "constant", "linear", "terms"});
  BranchConfig b;
  if (node["label"]) b.label = rd.text(node["label"], "branch label");
  if (!node["constant"] || !node["linear"]) rd.fail(node, "a branch needs constant and linear");
  b.constant = rd.numbers(node["constant"], "constant", Field::real);
  if (n == 0) n = b.constant.size();
  if (n == 0 || b.constant.size() != n) rd.fail(node["constant"], "constant needs " + std::to_string(n) + " entries");
  rd.expect_list(node["linear"], "linear");
  for (const auto& row : node["linear"]) {
    b.linear.push_back(rd.numbers(row, "linear row", Field::real));
    if (b.linear.back().size() != n) rd.fail(row, "linear rows need " + std::to_string(n) + " entries");
  }
  if (b.linear.size() != n) rd.fail(node["linear"], "linear needs " + std::to_string(n) + " rows");
  if (node["terms"]) b.terms = rd.terms(node["terms"], Field::real, n);
  return b;
}

ModelConfig read_model(const Reader& rd, const YAML::Node& node) {
  rd.check_keys(node, "model", {"branches", "allowed", "scale", "perturbation"});
  ModelConfig m;
  std::size_t n = 0;
  if (!node["branches"]) rd.fail(node, "model needs branches");
  rd.expect_list(node["branches"], "branches");
  for (const auto& b : node["branches"]) m.branches.push_back(read_branch(rd, b, n));
  if (node["allowed"]) m.allowed = rd.int_matrix(node["allowed"], "allowed");
  if (node["scale"]) m.scale = rd.number(node["scale"], "scale", Field::real);
  if (const auto p = node["perturbation"]) {
    rd.check_keys(p, "perturbation", {"shift", "branches"});
    if (p["shift"]) m.shift = rd.number(p["shift"], "shift", Field::real);
    if (p["branches"]) {
      rd.expect_list(p["branches"], "perturbation branches");
      for (const auto& b : p["branches"]) m.perturbed.push_back(read_branch(rd, b, n));
      if (m.perturbed.size() != m.branches.size())
        rd.fail(p["branches"], "perturbation needs one branch per model branch");
    }
    if (m.shift && !m.perturbed.empty()) rd.fail(p, "give either shift or branches");
  }
  try {
    build_model(m);
  } catch (const InvalidArgument& e) {
    rd.fail(node, std::string("invalid model: ") + e.what());
  }
  return m;
}

RunParams read_params(const Reader& rd, const YAML::Node& node) {
  rd.check_keys(node, "params",
                {"degree", "max_degree", "tol", "samples", "depth", "delta", "points", "seed", "step", "alpha"});
  RunParams p;
  if (node["degree"]) {
    if (node["degree"].IsScalar() && node["degree"].Scalar() == "auto")
      p.degree.reset();
    else
      p.degree = static_cast<int>(rd.non_negative(node["degree"], "degree"));
  }
  if (node["max_degree"]) p.max_degree = static_cast<int>(rd.non_negative(node["max_degree"], "max_degree"));
  if (node["tol"]) p.tol = rd.real(node["tol"], "tol");
  if (node["samples"]) p.samples = static_cast<int>(rd.non_negative(node["samples"], "samples"));
  if (node["depth"]) p.depth = static_cast<int>(rd.non_negative(node["depth"], "depth"));
  if (node["delta"]) p.delta = rd.real(node["delta"], "delta");
  if (node["points"]) p.points = static_cast<std::size_t>(rd.non_negative(node["points"], "points"));
  if (node["seed"]) p.seed = static_cast<std::uint64_t>(rd.non_negative(node["seed"], "seed"));
  if (node["step"]) p.step = rd.real(node["step"], "step");
  if (node["alpha"]) p.alpha = rd.real(node["alpha"], "alpha");
  if (!(p.tol > 0.0)) rd.fail(node["tol"], "tol must be positive");
  if (!(p.step > 0.0)) rd.fail(node["step"], "step must be positive");
  if (p.delta && !(*p.delta > 0.0 && *p.delta <= 1.0)) rd.fail(node["delta"], "delta must lie in (0, 1]");
  return p;
}

void emit_terms(YAML::Emitter& out, const std::vector<TermConfig>& terms) {
  out << YAML::Key << "terms" << YAML::Value << YAML::BeginSeq;
  for (const auto& t : terms) {
    out << YAML::Flow << YAML::BeginSeq << (t.component + 1) << YAML::Flow << t.index << t.value << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

void emit_fibers(YAML::Emitter& out, const std::vector<FiberConfig>& fibers) {
  out << YAML::BeginMap;
  for (const auto& f : fibers) {
    out << YAML::Key << f.key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lambda" << YAML::Value << YAML::Flow << f.lambda;
    emit_terms(out, f.terms);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
}

void emit_branch(YAML::Emitter& out, const BranchConfig& b) {
  out << YAML::BeginMap;
  if (!b.label.empty()) out << YAML::Key << "label" << YAML::Value << b.label;
  out << YAML::Key << "constant" << YAML::Value << YAML::Flow << b.constant;
  out << YAML::Key << "linear" << YAML::Value << YAML::Flow << b.linear;
  emit_terms(out, b.terms);
  out << YAML::EndMap;
}

template <class S>
FiberMap<S> make_fiber(const FiberConfig* cfg, std::size_t n, int degree, const S& scale) {
  FiberMap<S> f(n, degree);
  if (!cfg) return f;
  for (std::size_t i = 0; i < n; ++i)
    f.set_monomial(i, MultiIndex::unit(n, i), S(parse_scalar<S>(cfg->lambda[i]) * scale));
  for (const auto& t : cfg->terms)
    f.set_monomial(t.component, MultiIndex(t.index), S(parse_scalar<S>(t.value) * scale));
  return f;
}

int degree_of(const std::vector<FiberConfig>& fibers) {
  int r = 1;
  for (const auto& f : fibers)
    for (const auto& t : f.terms) r = std::max(r, MultiIndex(t.index).order());
  return r;
}

template <class S>
SkewSystem<S> tabulate_system(const SystemConfig& cfg, const std::vector<FiberConfig>& fibers, const BasePtr& base,
                              int degree, const S& scale) {
  const std::size_t n = fibers.empty() ? cfg.dimension : fibers.front().lambda.size();
  return SkewSystem<S>(CylinderFunction<FiberMap<S>>::tabulate(base, cfg.depth, [&](std::span<const int> w) {
    const std::string key = window_key(*base, w);
    const auto it = std::find_if(fibers.begin(), fibers.end(), [&](const FiberConfig& f) { return f.key == key; });
    return make_fiber<S>(it == fibers.end() ? nullptr : &*it, n, degree, scale);
  }));
}

PolyMap<double> make_branch(const BranchConfig& b) {
  const std::size_t n = b.constant.size();
  int degree = 1;
  for (const auto& t : b.terms) degree = std::max(degree, MultiIndex(t.index).order());
  PolyMap<double> p(n, degree);
  for (std::size_t i = 0; i < n; ++i) {
    p.set_monomial(i, MultiIndex::zero(n), parse_real(b.constant[i]));
    for (std::size_t j = 0; j < n; ++j) p.set_monomial(i, MultiIndex::unit(n, j), parse_real(b.linear[i][j]));
  }
  for (const auto& t : b.terms) p.set_monomial(t.component, MultiIndex(t.index), parse_real(t.value));
  return p;
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source << ':' << (e.mark.line + 1) << ':' << (e.mark.column + 1) << ": " << e.msg;
    throw ConfigError(os.str());
  }
  if (!root.IsMap()) throw ConfigError(source + ":1:1: configuration must be a mapping");
  rd.check_keys(root, "configuration", {"field", "system", "derivative", "model", "params", "output"});

  RunConfig c;
  if (root["field"]) {
    try {
      c.field = parse_field(rd.text(root["field"], "field"));
    } catch (const InvalidArgument& e) {
      rd.fail(root["field"], e.what());
    }
  }
  if (root["system"]) c.system = read_system(rd, root["system"], c.field);
  if (const auto d = root["derivative"]) {
    rd.check_keys(d, "derivative", {"direction"});
    if (!c.system) rd.fail(d, "derivative needs a system");
    if (!d["direction"]) rd.fail(d, "derivative needs a direction");
    std::size_t n = c.system->fibers.front().lambda.size();
    c.direction = read_fibers(rd, d["direction"], c.field, n, "direction");
    check_windows(rd, d["direction"], *c.system, c.direction, false);
  }
  if (root["model"]) c.model = read_model(rd, root["model"]);
  if (root["params"]) c.params = read_params(rd, root["params"]);
  if (const auto o = root["output"]) {
    rd.check_keys(o, "output", {"dir"});
    if (o["dir"]) c.out_dir = rd.text(o["dir"], "output dir");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string dump_config(const RunConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "field" << YAML::Value << to_string(c.field);
  if (c.system) {
    const auto& s = *c.system;
    out << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "base" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << s.base.kind;
    if (!s.base.sigma.empty()) out << YAML::Key << "sigma" << YAML::Value << YAML::Flow << s.base.sigma;
    if (s.base.length) out << YAML::Key << "length" << YAML::Value << s.base.length;
    if (s.base.alphabet) out << YAML::Key << "alphabet" << YAML::Value << s.base.alphabet;
    if (!s.base.transitions.empty())
      out << YAML::Key << "transitions" << YAML::Value << YAML::Flow << s.base.transitions;
    if (!s.base.labels.empty()) out << YAML::Key << "labels" << YAML::Value << YAML::Flow << s.base.labels;
    out << YAML::EndMap;
    if (s.dimension) out << YAML::Key << "dimension" << YAML::Value << s.dimension;
    out << YAML::Key << "depth" << YAML::Value << s.depth;
    out << YAML::Key << "fibers" << YAML::Value;
    emit_fibers(out, s.fibers);
    out << YAML::EndMap;
  }
  if (!c.direction.empty()) {
    out << YAML::Key << "derivative" << YAML::Value << YAML::BeginMap << YAML::Key << "direction" << YAML::Value;
    emit_fibers(out, c.direction);
    out << YAML::EndMap;
  }
  if (c.model) {
    const auto& m = *c.model;
    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "branches" << YAML::Value << YAML::BeginSeq;
    for (const auto& b : m.branches) emit_branch(out, b);
    out << YAML::EndSeq;
    if (!m.allowed.empty()) out << YAML::Key << "allowed" << YAML::Value << YAML::Flow << m.allowed;
    out << YAML::Key << "scale" << YAML::Value << m.scale;
    if (m.shift || !m.perturbed.empty()) {
      out << YAML::Key << "perturbation" << YAML::Value << YAML::BeginMap;
      if (m.shift) out << YAML::Key << "shift" << YAML::Value << *m.shift;
      if (!m.perturbed.empty()) {
        out << YAML::Key << "branches" << YAML::Value << YAML::BeginSeq;
        for (const auto& b : m.perturbed) emit_branch(out, b);
        out << YAML::EndSeq;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  const auto& p = c.params;
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "degree" << YAML::Value << (p.degree ? std::to_string(*p.degree) : std::string("auto"));
  out << YAML::Key << "max_degree" << YAML::Value << p.max_degree;
  out << YAML::Key << "tol" << YAML::Value << format_real(p.tol);
  out << YAML::Key << "samples" << YAML::Value << p.samples;
  out << YAML::Key << "depth" << YAML::Value << p.depth;
  if (p.delta) out << YAML::Key << "delta" << YAML::Value << format_real(*p.delta);
  out << YAML::Key << "points" << YAML::Value << p.points;
  out << YAML::Key << "seed" << YAML::Value << p.seed;
  out << YAML::Key << "step" << YAML::Value << format_real(p.step);
  out << YAML::Key << "alpha" << YAML::Value << format_real(p.alpha);
  out << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap << YAML::Key << "dir" << YAML::Value << c.out_dir
      << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

BasePtr build_base(const BaseConfig& b) {
  if (b.kind == "finite") return SymbolicBase::finite(b.sigma, b.labels);
  if (b.kind == "cycle") {
    if (b.length == 0) throw InvalidArgument("cycle base needs a positive length");
    if (!b.labels.empty()) {
      std::vector<int> sigma(b.length);
      for (std::size_t t = 0; t < b.length; ++t) sigma[t] = static_cast<int>((t + 1) % b.length);
      return SymbolicBase::finite(std::move(sigma), b.labels);
    }
    return SymbolicBase::cycle(b.length);
  }
  if (b.kind == "full_shift") {
    if (b.alphabet == 0) throw InvalidArgument("full shift needs a positive alphabet");
    return SymbolicBase::sft(b.alphabet, std::vector<std::vector<int>>(b.alphabet, std::vector<int>(b.alphabet, 1)),
                             b.labels);
  }
  return SymbolicBase::sft(b.alphabet ? b.alphabet : b.transitions.size(), b.transitions, b.labels);
}

template <class S>
SkewSystem<S> build_system(const SystemConfig& cfg, const BasePtr& base) {
  return tabulate_system<S>(cfg, cfg.fibers, base, degree_of(cfg.fibers), S(1));
}

template <class S>
SkewSystem<S> build_direction(const SystemConfig& cfg, const std::vector<FiberConfig>& direction, const BasePtr& base,
                              double alpha) {
  const int degree = std::max(degree_of(cfg.fibers), degree_of(direction));
  return tabulate_system<S>(cfg, direction, base, degree, parse_scalar<S>(format_real(alpha)));
}

ExpandingModel build_model(const ModelConfig& cfg) {
  ExpandingModel m;
  for (const auto& b : cfg.branches) m.branches.push_back(make_branch(b));
  m.dimension = m.branches.empty() ? 1 : m.branches.front().dimension();
  m.allowed = cfg.allowed;
  bool labelled = false;
  for (const auto& b : cfg.branches) labelled = labelled || !b.label.empty();
  if (labelled)
    for (std::size_t i = 0; i < cfg.branches.size(); ++i)
      m.labels.push_back(cfg.branches[i].label.empty() ? std::to_string(i) : cfg.branches[i].label);
  m.validate();
  return m;
}

std::vector<PolyMap<double>> build_perturbation(const ModelConfig& cfg, const ExpandingModel& model) {
  if (!cfg.perturbed.empty()) {
    std::vector<PolyMap<double>> out;
    for (const auto& b : cfg.perturbed) out.push_back(make_branch(b));
    return out;
  }
  if (!cfg.shift) throw InvalidArgument("continue needs model.perturbation (shift or branches)");
  const double eps = parse_real(*cfg.shift);
  auto out = model.branches;
  for (auto& b : out)
    for (std::size_t i = 0; i < b.dimension(); ++i) b.coeff(i, 0) += eps;
  return out;
}

template SkewSystem<double> build_system(const SystemConfig&, const BasePtr&);
template SkewSystem<std::complex<double>> build_system(const SystemConfig&, const BasePtr&);
template SkewSystem<mpq_class> build_system(const SystemConfig&, const BasePtr&);
template SkewSystem<double> build_direction(const SystemConfig&, const std::vector<FiberConfig>&, const BasePtr&, double);
template SkewSystem<std::complex<double>> build_direction(const SystemConfig&, const std::vector<FiberConfig>&,
                                                          const BasePtr&, double);

}  // namespace skewlin
