#include "pvqmle/json_io.hpp"

#include <fstream>

#include <fmt/format.h>

namespace pvq {

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

ThinningSpec thinning_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "binomial") return ThinningSpec::binomial(j.at("a").get<double>());
  if (kind == "poisson") return ThinningSpec::poisson(j.at("a").get<double>());
  if (kind == "geometric") return ThinningSpec::geometric(j.at("a").get<double>());
  if (kind == "negbin") {
    const double a = j.at("a").get<double>();
    if (j.contains("overdispersion")) return ThinningSpec::negbin(a, negbin_v_for_overdispersion(a, j.at("overdispersion").get<double>()));
    return ThinningSpec::negbin(a, j.at("v").get<double>());
  }
  if (kind == "binb") return ThinningSpec::binb(j.at("mu").get<double>(), j.at("pi").get<double>());
  throw Error(fmt::format("unknown thinning kind '{}'", kind));
}

Json thinning_to_json(const ThinningSpec& t) {
  switch (t.kind) {
    case ThinningKind::Binomial: return {{"kind", "binomial"}, {"a", t.a}};
    case ThinningKind::Poisson: return {{"kind", "poisson"}, {"a", t.a}};
    case ThinningKind::Geometric: return {{"kind", "geometric"}, {"a", t.a}};
    case ThinningKind::NegBin: return {{"kind", "negbin"}, {"a", t.a}, {"v", t.v}};
    case ThinningKind::BiNB: return {{"kind", "binb"}, {"mu", t.mu}, {"pi", t.pi}};
  }
  return {};
}

McVariants variants_from_json(const Json& j) {
  McVariants v;
  if (!j.is_object()) return v;
  v.inject_outlier = get_or(j, "inject_outlier", false);
  v.near_unit_root = get_or(j, "near_unit_root", false);
  return v;
}

}  // namespace

DgpSpec dgp_from_json(const Json& j) {
  DgpSpec spec;
  const auto type = get_or<std::string>(j, "type", "inar");
  spec.burn_in = get_or(j, "burn_in", 500);
  if (type == "inar") {
    InarSpec inar;
    for (const auto& t : j.at("thinning")) inar.thinning.push_back(thinning_from_json(t));
    const Json& inn = j.at("innovation");
    const auto kind = get_or<std::string>(inn, "kind", "poisson");
    if (kind == "poisson")
      inar.innovation = {InnovationKind::Poisson, inn.at("omega").get<double>(), 0.0};
    else if (kind == "negbin")
      inar.innovation = {InnovationKind::NegBin, inn.at("omega").get<double>(), inn.at("size").get<double>()};
    else
      throw Error(fmt::format("unknown innovation kind '{}'", kind));
    spec.model = inar;
  } else if (type == "beta") {
    spec.model = BetaArSpec{j.at("omega").get<double>(), j.at("alpha").get<double>(), j.at("beta").get<double>(),
                            j.at("phi").get<double>()};
  } else {
    throw Error(fmt::format("unknown DGP type '{}'", type));
  }
  spec.validate();
  return spec;
}

Json dgp_to_json(const DgpSpec& spec) {
  Json j;
  if (const auto* inar = std::get_if<InarSpec>(&spec.model)) {
    j["type"] = "inar";
    j["thinning"] = Json::array();
    for (const auto& t : inar->thinning) j["thinning"].push_back(thinning_to_json(t));
    if (inar->innovation.kind == InnovationKind::Poisson)
      j["innovation"] = {{"kind", "poisson"}, {"omega", inar->innovation.omega}};
    else
      j["innovation"] = {{"kind", "negbin"}, {"omega", inar->innovation.omega}, {"size", inar->innovation.size}};
  } else {
    const auto& b = std::get<BetaArSpec>(spec.model);
    j = {{"type", "beta"}, {"omega", b.omega}, {"alpha", b.alpha}, {"beta", b.beta}, {"phi", b.phi}};
  }
  j["burn_in"] = spec.burn_in;
  return j;
}

McConfig mc_config_from_json(const Json& j) {
  try {
    McConfig c;
    c.name = get_or<std::string>(j, "name", "mc");
    c.dgp = dgp_from_json(j.at("dgp"));
    if (j.contains("family")) c.family = FilterFamily::parse(j.at("family").get<std::string>());
    c.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
    c.n_reps = get_or(j, "n_reps", 500);
    for (const auto& e : get_or(j, "estimators", Json::array())) {
      EstimatorSpec s;
      s.tag = parse_estimator_tag(e.at("tag").get<std::string>());
      s.restriction = get_or<std::string>(e, "restriction", "");
      s.label = get_or<std::string>(e, "label", "");
      c.estimators.push_back(std::move(s));
    }
    for (const auto& t : get_or(j, "tests", Json::array())) {
      TestSpec s;
      s.restriction = t.at("restriction").get<std::string>();
      if (t.contains("levels")) s.levels = t.at("levels").get<std::vector<double>>();
      c.tests.push_back(std::move(s));
    }
    c.base_seed = get_or<std::uint64_t>(j, "base_seed", 1);
    if (j.contains("variants")) c.variants = variants_from_json(j.at("variants"));
    c.threads = get_or(j, "threads", 0);
    c.persist_reps = get_or(j, "persist_reps", false);
    if (j.contains("fit")) {
      const Json& f = j.at("fit");
      c.fit_options.tol_g = get_or(f, "tol_g", c.fit_options.tol_g);
      c.fit_options.max_iter = get_or(f, "max_iter", c.fit_options.max_iter);
      c.fit_options.max_restarts = get_or(f, "max_restarts", c.fit_options.max_restarts);
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("invalid Monte Carlo config: {}", e.what()));
  }
}

Json mc_config_to_json(const McConfig& c) {
  Json j;
  j["name"] = c.name;
  j["dgp"] = dgp_to_json(c.dgp);
  j["family"] = c.fit_family().name();
  j["sample_sizes"] = c.sample_sizes;
  j["n_reps"] = c.n_reps;
  j["estimators"] = Json::array();
  for (const auto& e : c.estimators) {
    Json ej = {{"tag", std::string(to_string(e.tag))}};
    if (!e.restriction.empty()) ej["restriction"] = e.restriction;
    if (!e.label.empty()) ej["label"] = e.label;
    j["estimators"].push_back(ej);
  }
  j["tests"] = Json::array();
  for (const auto& t : c.tests) j["tests"].push_back({{"restriction", t.restriction}, {"levels", t.levels}});
  j["base_seed"] = c.base_seed;
  j["variants"] = {{"inject_outlier", c.variants.inject_outlier}, {"near_unit_root", c.variants.near_unit_root}};
  j["threads"] = c.threads;
  j["persist_reps"] = c.persist_reps;
  j["fit"] = {{"tol_g", c.fit_options.tol_g},
              {"max_iter", c.fit_options.max_iter},
              {"max_restarts", c.fit_options.max_restarts}};
  return j;
}

PowerConfig power_config_from_json(const Json& j) {
  try {
    PowerConfig c;
    c.a = get_or(j, "a", c.a);
    c.omega = get_or(j, "omega", c.omega);
    if (j.contains("overdispersion")) c.overdispersion = j.at("overdispersion").get<std::vector<double>>();
    if (j.contains("sample_sizes")) c.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
    c.n_reps = get_or(j, "n_reps", c.n_reps);
    c.restriction = get_or(j, "restriction", c.restriction);
    c.level = get_or(j, "level", c.level);
    c.base_seed = get_or<std::uint64_t>(j, "base_seed", c.base_seed);
    c.burn_in = get_or(j, "burn_in", c.burn_in);
    if (j.contains("variants")) c.variants = variants_from_json(j.at("variants"));
    c.threads = get_or(j, "threads", c.threads);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("invalid power config: {}", e.what()));
  }
}

Json fit_to_json(const FitResult& fit, const CovarianceResult* covariance) {
  Json j;
  j["estimator"] = std::string(to_string(fit.tag));
  j["family"] = fit.family.name();
  j["restriction"] = fit.restricted() ? fit.restriction->name() : "none";
  Json est = Json::object();
  const Eigen::VectorXd theta = fit.theta_hat.theta();
  for (Eigen::Index i = 0; i < theta.size(); ++i) est[fit.theta_hat.names[static_cast<std::size_t>(i)]] = theta(i);
  j["estimates"] = est;
  if (covariance) {
    const auto names = fit.restricted() ? fit.restriction->reduced_names() : fit.theta_hat.names;
    Json se = Json::object();
    for (Eigen::Index i = 0; i < covariance->se.size(); ++i) se[names[static_cast<std::size_t>(i)]] = covariance->se(i);
    j["se"] = se;
    j["covariance_flags"] = {{"psd_flag", covariance->psd_flag},
                             {"indefinite", covariance->indefinite},
                             {"condition_number", covariance->condition_number}};
  }
  j["loglik"] = fit.loglik;
  j["n_terms"] = fit.n_terms;
  j["convergence"] = {{"converged", fit.converged},
                      {"iterations", fit.iterations},
                      {"restarts", fit.restarts},
                      {"grad_norm", fit.grad_norm},
                      {"clamp_flag", fit.clamp_flag}};
  return j;
}

Json wald_to_json(const WaldResult& w) {
  return {{"restriction", w.restriction_name},
          {"statistic", w.statistic},
          {"dof", w.dof},
          {"p_value", w.p_value},
          {"r_hat", std::vector<double>(w.r_hat.data(), w.r_hat.data() + w.r_hat.size())}};
}

Json application_to_json(const ApplicationReport& report) {
  Json j;
  j["unrestricted"] = fit_to_json(report.unrestricted, &report.covariance);
  j["tests"] = Json::array();
  for (const auto& w : report.tests) j["tests"].push_back(wald_to_json(w));
  j["restricted"] = Json::array();
  for (const auto& r : report.restricted) j["restricted"].push_back(fit_to_json(r.fit, &r.covariance));
  j["residual_acf"] = report.residual_acf;
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
}

}  // namespace pvq
