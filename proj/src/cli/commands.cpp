#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fraisse/cli.hpp"
#include "fraisse/errors.hpp"
#include "fraisse/fraisse_builder.hpp"
#include "fraisse/gaussian_field.hpp"
#include "fraisse/io.hpp"
#include "fraisse/linear_orders.hpp"
#include "fraisse/type_geometry.hpp"

namespace fraisse::cli {

using nlohmann::json;
namespace fs = std::filesystem;

json ExperimentConfig::to_json() const {
  return json{{"command", command}, {"inputs", inputs},   {"seed", seed},
              {"samples", samples}, {"out", out},         {"tol", tol},
              {"denom_bits", denom_bits}, {"params", params}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("command")) c.command = j.at("command").get<std::string>();
  if (j.contains("inputs")) c.inputs = j.at("inputs").get<std::vector<std::string>>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("samples")) c.samples = j.at("samples").get<std::size_t>();
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  if (j.contains("tol")) c.tol = j.at("tol").get<double>();
  if (j.contains("denom_bits")) c.denom_bits = j.at("denom_bits").get<unsigned>();
  if (j.contains("params")) c.params = j.at("params");
  return c;
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("out");
  return io::sha256_hex(io::canonical(j));
}

namespace {

// Raised for bad user input; maps to exit code 1.
struct UsageError : Error {
  using Error::Error;
};

Rational parse_rational_text(const std::string& text) {
  Rational q;
  if (text.empty() || q.set_str(text, 10) != 0 || q.get_den() == 0)
    throw UsageError("not a rational number: '" + text + "'");
  q.canonicalize();
  return q;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::size_t> index_list(const json& params, const char* key) {
  std::vector<std::size_t> out;
  if (!params.contains(key)) return out;
  const json& v = params.at(key);
  if (v.is_array()) return v.get<std::vector<std::size_t>>();
  for (const auto& tok : split(v.get<std::string>(), ',')) out.push_back(std::stoul(tok));
  return out;
}

std::vector<Rational> rational_list(const json& params, const char* key) {
  std::vector<Rational> out;
  if (!params.contains(key)) return out;
  const json& v = params.at(key);
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(e.is_string() ? parse_rational_text(e.get<std::string>())
                                                        : io::rational_from_json(e));
    return out;
  }
  for (const auto& tok : split(v.get<std::string>(), ',')) out.push_back(parse_rational_text(tok));
  return out;
}

std::optional<Rational> rational_param(const json& params, const char* key) {
  if (!params.contains(key)) return std::nullopt;
  const json& v = params.at(key);
  if (v.is_string()) return parse_rational_text(v.get<std::string>());
  if (v.is_number_integer()) return Rational(mpz_class(std::to_string(v.get<std::int64_t>())));
  return io::rational_from_json(v);
}

// "0>0,1<-1/2": index, comparison, rational threshold
CylinderEvent parse_event(const std::string& text) {
  CylinderEvent ev;
  for (const auto& tok : split(text, ',')) {
    const auto at = tok.find_first_of("<>");
    if (at == std::string::npos || at == 0) throw UsageError("bad event constraint '" + tok + "'");
    ThresholdConstraint c;
    c.index = std::stoul(tok.substr(0, at));
    c.side = tok[at] == '>' ? Side::Greater : Side::Less;
    c.threshold = parse_rational_text(tok.substr(at + 1));
    ev.constraints.push_back(c);
  }
  return ev;
}

struct Context {
  const ExperimentConfig& cfg;
  std::string config_hash;
  std::ostream& out;
  fs::path dir;

  SnapPolicy policy() const { return SnapPolicy{cfg.denom_bits, 3}; }

  const std::string& input(std::size_t i) const {
    if (i >= cfg.inputs.size()) throw UsageError("missing input file #" + std::to_string(i + 1));
    return cfg.inputs[i];
  }

  // Every file carries the config hash and seed.
  void write(const std::string& name, json body) const {
    body["config_hash"] = config_hash;
    body["seed"] = cfg.seed;
    body["command"] = cfg.command;
    body["isa"] = kernels::isa_name(kernels::active_isa());
    io::write_json_file(dir / name, body);
  }
  void write_text(const std::string& name, const std::string& body) const {
    fs::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    f << "# config_hash=" << config_hash << " seed=" << cfg.seed
      << " isa=" << kernels::isa_name(kernels::active_isa()) << '\n' << body;
  }
};

int cmd_certify(const Context& ctx) {
  const io::DistanceFile file = io::read_distance_file(ctx.input(0));
  const Certification cert = certify_sphere_distances(file.sq_dist);
  json body = io::certificate_to_json(cert);
  body["labels"] = file.labels;
  ctx.write("certificate.json", body);
  if (cert.is_member()) {
    ctx.out << "member: " << file.labels.size() << " points, pivots";
    for (const auto& p : *cert.gram.pd_certificate) ctx.out << ' ' << to_string(p);
    ctx.out << '\n';
    return 0;
  }
  ctx.out << "not a member: pivot " << cert.rejection->pivot_index << ", leading minor "
          << to_string(cert.rejection->leading_minor) << '\n';
  return 2;
}

int cmd_embed(const Context& ctx) {
  const SpaceDistances space = io::read_space_file(ctx.input(0));
  const Certification cert = certify_membership(space);
  if (!cert.is_member()) {
    ctx.out << "not a member; nothing to embed\n";
    ctx.write("certificate.json", io::certificate_to_json(cert));
    return 2;
  }
  const EmbeddedSpace emb = embed(space, ctx.cfg.tol);
  const EmbeddingError e = embedding_error(space, emb);
  json body = io::coords_to_json(emb.coords);
  body["labels"] = space.labels();
  body["tol"] = emb.tol;
  body["max_sq_dist_error"] = e.max_sq_dist_error;
  body["max_norm_error"] = e.max_norm_error;
  ctx.write("embedding.json", body);
  ctx.out << "embedded " << space.size() << " points; max d^2 error " << e.max_sq_dist_error << '\n';
  return 0;
}

int cmd_amalgamate(const Context& ctx) {
  AmalgamProblem p;
  p.left = io::read_space_file(ctx.input(0));
  p.right = io::read_space_file(ctx.input(1));
  p.common_left = index_list(ctx.cfg.params, "common_left");
  p.common_right = index_list(ctx.cfg.params, "common_right");
  const Amalgam a = amalgamate(p);
  ctx.write("amalgam.json", io::space_to_json(a.space));
  json meta{{"left_map", a.left_map}, {"right_map", a.right_map},
            {"certificate", io::certificate_to_json({a.certificate, std::nullopt})}};
  ctx.write("amalgam_maps.json", meta);
  ctx.out << "amalgam of " << p.left.size() << " + " << p.right.size() << " over "
          << p.common_left.size() << " -> " << a.space.size() << " points\n";
  return 0;
}

int cmd_grow(const Context& ctx) {
  SpaceDistances start;
  if (!ctx.cfg.inputs.empty()) start = io::read_space_file(ctx.input(0));
  const std::size_t stages = ctx.cfg.params.value("stages", std::size_t{8});
  const std::size_t per_stage = ctx.cfg.params.value("per_stage", std::size_t{1});
  const GenericChain chain = grow_chain(start, stages, per_stage, ctx.cfg.seed, ctx.policy());
  const json provenance{{"config_hash", ctx.config_hash}, {"seed", ctx.cfg.seed}, {"command", ctx.cfg.command}};
  json manifest = io::write_chain(ctx.dir / "chain", chain, provenance);
  manifest["coherent"] = chain_is_coherent(chain);
  ctx.write("chain_manifest.json", manifest);
  ctx.out << "grew " << chain.stages.size() << " stages, final size " << chain.stages.back().size()
          << '\n';
  return 0;
}

json points_sidecar(const TypeSphere& ts, const std::vector<Eigen::VectorXd>& extra) {
  Eigen::MatrixXd coords(ts.base.coords.rows() + static_cast<Eigen::Index>(extra.size()),
                         static_cast<Eigen::Index>(ts.ambient_dim()));
  coords.topRows(ts.base.coords.rows()) = ts.base.coords;
  for (std::size_t i = 0; i < extra.size(); ++i)
    coords.row(ts.base.coords.rows() + static_cast<Eigen::Index>(i)) = extra[i].transpose();
  return io::coords_to_json(coords);
}

int cmd_witness(const Context& ctx) {
  const SpaceDistances base = io::read_space_file(ctx.input(0));
  const json& prm = ctx.cfg.params;
  const std::vector<Rational> type = rational_list(prm, "type");
  const TypeSphere ts = type_sphere(base, type, ctx.cfg.tol);
  const std::string kind = prm.value("kind", std::string("theta"));
  const Rational xy = rational_param(prm, "xy").value_or(
      snap_to_grid(ts.radius_sq, ctx.cfg.denom_bits));  // default: angle 60 degrees on the sphere
  const auto [x, y] = realize_pair(ts, xy);
  json body{{"kind", kind}, {"radius_sq", ts.radius_sq}, {"xy", io::rational_to_json(xy)}};

  if (kind == "theta") {
    const double eps = epsilon_threshold(ts, x, y);
    const Rational target =
        rational_param(prm, "target").value_or(snap_to_grid(0.5 * eps * eps, ctx.cfg.denom_bits));
    const ThetaSolution sol = solve_theta_for_distance(ts, x, y, SquaredDistance(target), ctx.policy());
    body["epsilon"] = eps;
    body["target"] = io::rational_to_json(target);
    body["theta"] = sol.theta;
    body["sq_dist_error"] = sol.sq_dist_error;
    body["certificate"] = io::certificate_to_json({sol.certificate, std::nullopt});
    ctx.write("witness_space.json", io::space_to_json(sol.configuration));
    ctx.write("witness_coords.json", points_sidecar(ts, {x, y, sol.point}));
    ctx.out << "theta " << sol.theta << " realizes d^2 " << to_string(target) << " (eps " << eps << ")\n";
  } else if (kind == "connect") {
    const double ab = sphere_angle(ts, x, y);
    const double phi = prm.value("phi", 0.5 * (ab + std::numbers::pi));
    CounterRng rng(ctx.cfg.seed);
    const ConnectednessWitness w = connectedness_witness(ts, x, y, phi, rng, ctx.policy());
    body["phi"] = phi;
    body["angle_a"] = w.angle_a;
    body["angle_b"] = w.angle_b;
    body["half_angle_bound"] = w.half_angle_bound;
    body["chord_bound"] = w.chord_bound;
    body["span_residual"] = w.span_residual;
    body["attempts"] = w.attempts;
    body["certificate"] = io::certificate_to_json({w.certificate, std::nullopt});
    ctx.write("witness_space.json", io::space_to_json(w.configuration));
    ctx.write("witness_coords.json", points_sidecar(ts, {x, y, w.z}));
    ctx.out << "witness z found after " << w.attempts << " attempts\n";
  } else if (kind == "chain") {
    const Rational step = rational_param(prm, "step").value_or(Rational(mpz_class(1), mpz_class(100)));
    const TypeChain chain = connect_by_chain(ts, x, y, SquaredDistance(step), ctx.policy());
    json links = json::array();
    for (std::size_t i = 0; i < chain.link_sq.size(); ++i)
      links.push_back(json{{"sq_dist", io::rational_to_json(chain.link_sq[i])},
                           {"certificate", io::certificate_to_json({chain.link_certificates[i], std::nullopt})}});
    body["step"] = io::rational_to_json(step);
    body["links"] = std::move(links);
    ctx.write("witness_coords.json", points_sidecar(ts, chain.points));
    ctx.out << "chain of " << chain.points.size() << " points\n";
  } else {
    throw UsageError("unknown witness kind '" + kind + "' (theta|connect|chain)");
  }
  ctx.write("witness.json", body);
  return 0;
}

int cmd_sample(const Context& ctx) {
  const SpaceDistances space = io::read_space_file(ctx.input(0));
  const GaussianModel model = GaussianModel::build(space, ctx.cfg.seed);
  const SampleMatrix draws = sample(model, ctx.cfg.samples);
  ctx.write_text("samples.csv", io::samples_csv(space, draws));
  ctx.out << "wrote " << draws.rows << " draws of " << draws.cols << " values\n";
  return 0;
}

int cmd_mixing(const Context& ctx) {
  const SpaceDistances space = io::read_space_file(ctx.input(0));
  const CylinderEvent event = parse_event(ctx.cfg.params.value("event", std::string("0>0")));
  for (std::size_t i : event.point_indices())
    if (i >= space.size()) throw UsageError("event index " + std::to_string(i) + " out of range");
  const std::vector<std::size_t> ks = index_list(ctx.cfg.params, "k_values");
  const MixingReport rep = mixing_experiment(space, event, ks, ctx.cfg.samples, ctx.cfg.seed);
  json body = io::mixing_to_json(rep);
  body["space_hash"] = io::space_hash(space);
  ctx.write("mixing.json", body);
  ctx.write_text("mixing.csv", io::mixing_csv(rep));
  for (const auto& r : rep.rows)
    ctx.out << "k=" << r.k << " joint=" << r.joint.value << " product=" << r.product.value
            << " kl=" << r.kl << " tv<=" << r.tv_bound << '\n';
  return 0;
}

int cmd_orders(const Context& ctx) {
  const SpaceDistances space = io::read_space_file(ctx.input(0));
  const GaussianModel model = GaussianModel::build(space, ctx.cfg.seed);
  std::vector<std::size_t> idx = index_list(ctx.cfg.params, "indices");
  if (idx.empty()) {
    idx.resize(space.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  const OrderDistribution dist = order_distribution(model, idx, ctx.cfg.samples);
  const UniformityTest test = uniformity_test(dist);
  const SupportReport support = full_support_check(dist, &model);
  json body = io::orders_to_json(dist);
  body["space_hash"] = io::space_hash(space);
  body["chi_square"] = test.statistic;
  body["p_value"] = test.p_value;
  body["dof"] = test.dof;
  body["degenerate"] = test.degenerate;
  body["full_support"] = support.all_observed;
  if (support.exact_available) {
    json exact = json::object();
    for (const auto& o : all_orderings(dist.k)) exact[o] = ordering_prob_exact(model, idx, o);
    body["exact"] = std::move(exact);
  }
  std::string verdict;
  int code = 0;
  if (test.degenerate) {
    verdict = "degenerate: a single ordering (k=1)";
  } else if (test.p_value < 1e-3) {
    verdict = "REJECT uniform (p < 1e-3)";
    code = 2;
  } else {
    verdict = "no evidence against uniform";
  }
  body["verdict"] = verdict;
  ctx.write("orders.json", body);
  ctx.out << "chi-square " << test.statistic << " p-value " << test.p_value << '\n' << verdict << '\n';
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite pointed sphere spaces, their Gaussian field and induced random orders"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::string out_dir;
  double tol = 0;
  unsigned denom_bits = 0;
  std::vector<std::string> inputs;
  std::map<std::string, std::string> str_params;
  std::map<std::string, double> num_params;
  std::map<std::string, std::size_t> count_params;

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"certify", "exact membership certificate for a space file"},
      {"embed", "float unit-sphere coordinates of a certified space"},
      {"amalgamate", "free amalgam of two spaces over a common part"},
      {"grow", "generic chain of random one-point extensions"},
      {"witness", "type-sphere constructions: theta | connect | chain"},
      {"sample", "raw Gaussian field draws as CSV"},
      {"mixing", "mixing experiment with near-orthogonal copies"},
      {"orders", "distribution of the induced random linear order"},
  };
  std::map<std::string, CLI::App*> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    apps[s.name] = sub;
    sub->add_option("--config", config_path, "JSON config file; flags override it");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--samples", samples, "Monte Carlo sample count");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--tol", tol, "float tolerance");
    sub->add_option("--denom-bits", denom_bits, "snapping grid: denominators 2^b");
    sub->add_option("inputs", inputs, "input space files");
  }
  apps["amalgamate"]->add_option("--common-left", str_params["common_left"], "indices in left, e.g. 0,1");
  apps["amalgamate"]->add_option("--common-right", str_params["common_right"], "matching indices in right");
  apps["grow"]->add_option("--stages", count_params["stages"], "number of stages");
  apps["grow"]->add_option("--per-stage", count_params["per_stage"], "points added per stage");
  apps["witness"]->add_option("--kind", str_params["kind"], "theta | connect | chain");
  apps["witness"]->add_option("--type", str_params["type"], "squared distances to the base, e.g. 1,3/2");
  apps["witness"]->add_option("--xy", str_params["xy"], "squared distance between x and y");
  apps["witness"]->add_option("--target", str_params["target"], "target squared distance for theta");
  apps["witness"]->add_option("--phi", num_params["phi"], "angle bound for the connectedness witness");
  apps["witness"]->add_option("--step", str_params["step"], "maximal squared jump for chains");
  apps["mixing"]->add_option("--event", str_params["event"], "cylinder, e.g. 0>0,1<1/2");
  apps["mixing"]->add_option("--k", str_params["k_values"], "copy indices k, e.g. 2,4,8");
  apps["orders"]->add_option("--indices", str_params["indices"], "k-tuple of point indices");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::from_json(io::read_json_file(config_path));
    cfg.command = sub->get_name();
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--samples")) cfg.samples = samples;
    if (sub->count("--out")) cfg.out = out_dir;
    if (sub->count("--tol")) cfg.tol = tol;
    if (sub->count("--denom-bits")) cfg.denom_bits = denom_bits;
    if (sub->count("inputs")) cfg.inputs = inputs;
    const std::map<std::string, std::string> flag_of = {
        {"common_left", "--common-left"}, {"common_right", "--common-right"}, {"kind", "--kind"},
        {"type", "--type"}, {"xy", "--xy"}, {"target", "--target"}, {"step", "--step"},
        {"event", "--event"}, {"k_values", "--k"}, {"indices", "--indices"}};
    for (const auto& [key, flag] : flag_of)
      if (sub->get_option_no_throw(flag) && sub->count(flag)) cfg.params[key] = str_params[key];
    if (sub->get_option_no_throw("--phi") && sub->count("--phi")) cfg.params["phi"] = num_params["phi"];
    if (sub->get_option_no_throw("--stages") && sub->count("--stages")) cfg.params["stages"] = count_params["stages"];
    if (sub->get_option_no_throw("--per-stage") && sub->count("--per-stage"))
      cfg.params["per_stage"] = count_params["per_stage"];

    const Context ctx{cfg, cfg.hash(), out, fs::path(cfg.out)};
    json effective = cfg.to_json();
    effective.erase("out");
    ctx.write("config.json", effective);
    const std::string& name = cfg.command;
    if (name == "certify") return cmd_certify(ctx);
    if (name == "embed") return cmd_embed(ctx);
    if (name == "amalgamate") return cmd_amalgamate(ctx);
    if (name == "grow") return cmd_grow(ctx);
    if (name == "witness") return cmd_witness(ctx);
    if (name == "sample") return cmd_sample(ctx);
    if (name == "mixing") return cmd_mixing(ctx);
    if (name == "orders") return cmd_orders(ctx);
    err << "error: unknown command\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fraisse::cli
