#include "pvqmle/family.hpp"

#include <cmath>

#include <fmt/format.h>

namespace pvq {

FilterFamily FilterFamily::inar(int lags) {
  if (lags < 1) throw Error(fmt::format("INAR lag order must be >= 1, got {}", lags));
  return {FamilyKind::InarLinear, lags};
}

FilterFamily FilterFamily::ingarch() { return {FamilyKind::IngarchLinear, 1}; }

FilterFamily FilterFamily::beta() { return {FamilyKind::BetaVar, 1}; }

FilterFamily FilterFamily::parse(std::string_view name) {
  if (name == "ingarch") return ingarch();
  if (name == "beta") return beta();
  if (name.starts_with("inar")) {
    auto rest = name.substr(4);
    if (rest.empty()) return inar(1);
    int p = 0;
    for (char c : rest) {
      if (c < '0' || c > '9') throw Error(fmt::format("unknown family '{}'", name));
      p = p * 10 + (c - '0');
    }
    return inar(p);
  }
  throw Error(fmt::format("unknown family '{}'", name));
}

std::string FilterFamily::name() const {
  switch (kind) {
    case FamilyKind::InarLinear: return lags == 1 ? "inar" : fmt::format("inar{}", lags);
    case FamilyKind::IngarchLinear: return "ingarch";
    case FamilyKind::BetaVar: return "beta";
  }
  return "inar";
}

int FilterFamily::psi_size() const {
  return kind == FamilyKind::InarLinear ? lags + 1 : 3;
}

int FilterFamily::gamma_size() const {
  switch (kind) {
    case FamilyKind::InarLinear: return lags + 1;
    case FamilyKind::IngarchLinear: return 3;
    case FamilyKind::BetaVar: return 4;
  }
  return 0;
}

int FilterFamily::first_usable() const {
  return kind == FamilyKind::InarLinear ? lags : 1;
}

std::vector<std::string> FilterFamily::coordinate_names() const {
  std::vector<std::string> names;
  if (kind == FamilyKind::InarLinear) {
    names.push_back("omega1");
    for (int h = 1; h <= lags; ++h) names.push_back(lags == 1 ? "a" : fmt::format("a{}", h));
    names.push_back("omega2");
    for (int h = 1; h <= lags; ++h) names.push_back(lags == 1 ? "b" : fmt::format("b{}", h));
    return names;
  }
  names = {"omega1", "alpha1", "beta1", "omega2", "alpha2", "beta2"};
  if (kind == FamilyKind::BetaVar) names.push_back("phi");
  return names;
}

int FilterFamily::index_of(std::string_view coordinate) const {
  const auto names = coordinate_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == coordinate) return static_cast<int>(i);
  throw Error(fmt::format("family '{}' has no coordinate '{}'", name(), coordinate));
}

ParamVector ParamVector::from_theta(const FilterFamily& family, const Eigen::VectorXd& theta) {
  if (theta.size() != family.size())
    throw Error(fmt::format("family '{}' expects {} parameters, got {}", family.name(), family.size(),
                            theta.size()));
  ParamVector out;
  out.psi = theta.head(family.psi_size());
  out.gamma = theta.tail(family.gamma_size());
  out.names = family.coordinate_names();
  return out;
}

Eigen::VectorXd ParamVector::theta() const {
  Eigen::VectorXd t(psi.size() + gamma.size());
  t << psi, gamma;
  return t;
}

double ParamVector::operator[](std::string_view coordinate) const {
  const Eigen::VectorXd t = theta();
  for (std::size_t i = 0; i < names.size() && i < static_cast<std::size_t>(t.size()); ++i)
    if (names[i] == coordinate) return t(static_cast<Eigen::Index>(i));
  throw Error(fmt::format("no coordinate named '{}'", coordinate));
}

namespace {

std::string admissibility_problem(const FilterFamily& family, const Eigen::VectorXd& theta) {
  if (theta.size() != family.size())
    return fmt::format("expected {} parameters, got {}", family.size(), theta.size());
  if (!theta.allFinite()) return "non-finite parameter";
  const auto names = family.coordinate_names();
  if (family.kind == FamilyKind::InarLinear) {
    const int p = family.lags;
    if (theta(0) <= 0.0) return "omega1 must be > 0";
    if (theta(p + 1) <= 0.0) return "omega2 must be > 0";
    for (int h = 1; h <= p; ++h) {
      if (theta(h) < 0.0) return fmt::format("{} must be >= 0", names[h]);
      if (theta(p + 1 + h) < 0.0) return fmt::format("{} must be >= 0", names[p + 1 + h]);
    }
    return {};
  }
  for (int block = 0; block < 2; ++block) {
    const double w = theta(3 * block), al = theta(3 * block + 1), be = theta(3 * block + 2);
    if (w <= 0.0) return fmt::format("{} must be > 0", names[3 * block]);
    if (al < 0.0) return fmt::format("{} must be >= 0", names[3 * block + 1]);
    if (be < 0.0 || be >= 1.0) return fmt::format("{} must lie in [0,1)", names[3 * block + 2]);
    if (family.kind == FamilyKind::BetaVar && w + al + be >= 1.0)
      return fmt::format("{}+{}+{} must be < 1", names[3 * block], names[3 * block + 1], names[3 * block + 2]);
  }
  if (family.kind == FamilyKind::BetaVar && theta(6) <= 0.0) return "phi must be > 0";
  return {};
}

}  // namespace

bool is_admissible(const FilterFamily& family, const Eigen::VectorXd& theta) {
  return admissibility_problem(family, theta).empty();
}

void validate_params(const FilterFamily& family, const Eigen::VectorXd& theta) {
  auto problem = admissibility_problem(family, theta);
  if (!problem.empty())
    throw Error(fmt::format("inadmissible parameters for family '{}': {}", family.name(), problem));
}

}  // namespace pvq
