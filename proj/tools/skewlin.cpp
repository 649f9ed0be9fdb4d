#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "skewlin/commands.hpp"
#include "skewlin/config.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string degree;
  std::optional<double> tol;
  std::optional<int> depth;
  std::optional<double> delta;
  std::optional<int> samples;
  std::optional<std::size_t> points;
  std::optional<std::string> out_dir;
  std::optional<std::string> field;
  std::optional<std::uint64_t> seed;
};

void add_options(CLI::App& sub, Overrides& o) {
  sub.add_option("config", o.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
  sub.add_option("--degree", o.degree, "jet degree r, or 'auto' for the minimal r")->envname("SKEWLIN_DEGREE");
  sub.add_option("--tol", o.tol, "convergence tolerance")->envname("SKEWLIN_TOL");
  sub.add_option("--depth", o.depth, "word length for model commands")->envname("SKEWLIN_DEPTH");
  sub.add_option("--delta", o.delta, "flat-stage radius")->envname("SKEWLIN_DELTA");
  sub.add_option("--samples", o.samples, "samples for the hypothesis checks")->envname("SKEWLIN_SAMPLES");
  sub.add_option("--points", o.points, "defect grid points")->envname("SKEWLIN_POINTS");
  sub.add_option("--out-dir", o.out_dir, "output directory")->envname("SKEWLIN_OUT_DIR");
  sub.add_option("--field", o.field, "real, complex or rational")
      ->check(CLI::IsMember({"real", "complex", "rational"}))
      ->envname("SKEWLIN_FIELD");
  sub.add_option("--seed", o.seed, "sampling seed")->envname("SKEWLIN_SEED");
}

void apply(const Overrides& o, skewlin::RunConfig& c) {
  if (!o.degree.empty()) {
    if (o.degree == "auto") {
      c.params.degree.reset();
    } else {
      std::size_t used = 0;
      int r = 0;
      try {
        r = std::stoi(o.degree, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != o.degree.size() || r < 1) throw skewlin::InvalidArgument("--degree must be a positive integer or 'auto'");
      c.params.degree = r;
    }
  }
  if (o.tol) c.params.tol = *o.tol;
  if (o.depth) c.params.depth = *o.depth;
  if (o.delta) c.params.delta = *o.delta;
  if (o.samples) c.params.samples = *o.samples;
  if (o.points) c.params.points = *o.points;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.seed) c.params.seed = *o.seed;
  if (o.field) {
    if (*o.field == "real") c.field = skewlin::Field::real;
    if (*o.field == "complex") c.field = skewlin::Field::complex;
    if (*o.field == "rational") c.field = skewlin::Field::rational;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linearization of contracting skew products"};
  app.require_subcommand(1);
  Overrides o;
  const char* help[] = {"check the hypotheses and report the minimal degree",
                        "compute the linearizing jets and the conjugacy defect",
                        "splitting, charts and attractor of an expanding model",
                        "continue the hyperbolic set under a perturbation",
                        "coefficient derivative against finite differences"};
  std::size_t i = 0;
  for (const auto& name : skewlin::command_names()) add_options(*app.add_subcommand(name, help[i++]), o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? skewlin::kExitSuccess : skewlin::kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto config = skewlin::load_config(o.config);
    apply(o, config);
    return skewlin::run_command(command, config, std::cout, std::cerr);
  } catch (const skewlin::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return skewlin::kExitUsage;
  }
}
