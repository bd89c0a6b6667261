#include "pvqmle/restriction.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace pvq {

std::string_view to_string(RestrictionKind kind) {
  switch (kind) {
    case RestrictionKind::BinomialThinning: return "binomial";
    case RestrictionKind::PoissonThinning: return "poisson";
    case RestrictionKind::GeometricThinning: return "geometric";
    case RestrictionKind::EquidispersedError: return "equidispersed";
    case RestrictionKind::EqualAlpha: return "alpha";
    case RestrictionKind::EqualBeta: return "beta";
    case RestrictionKind::FullEqual: return "full";
  }
  return "?";
}

RestrictionKind parse_restriction_kind(std::string_view name) {
  if (name == "binomial") return RestrictionKind::BinomialThinning;
  if (name == "poisson") return RestrictionKind::PoissonThinning;
  if (name == "geometric") return RestrictionKind::GeometricThinning;
  if (name == "equidispersed" || name == "omega") return RestrictionKind::EquidispersedError;
  if (name == "alpha") return RestrictionKind::EqualAlpha;
  if (name == "beta") return RestrictionKind::EqualBeta;
  if (name == "full") return RestrictionKind::FullEqual;
  throw Error(fmt::format("unknown restriction '{}'", name));
}

double link_value(Link link, double x) {
  switch (link) {
    case Link::Identity: return x;
    case Link::Binomial: return x * (1.0 - x);
    case Link::Geometric: return x + x * x;
  }
  return x;
}

double link_derivative(Link link, double x) {
  switch (link) {
    case Link::Identity: return 1.0;
    case Link::Binomial: return 1.0 - 2.0 * x;
    case Link::Geometric: return 1.0 + 2.0 * x;
  }
  return 1.0;
}

double link_second_derivative(Link link, double) {
  switch (link) {
    case Link::Identity: return 0.0;
    case Link::Binomial: return -2.0;
    case Link::Geometric: return 2.0;
  }
  return 0.0;
}

namespace {

std::vector<RestrictedCoordinate> atoms(RestrictionKind kind, const FilterFamily& family) {
  const bool inar = family.kind == FamilyKind::InarLinear;
  auto mismatch = [&] {
    return Error(fmt::format("restriction '{}' does not apply to family '{}'", to_string(kind), family.name()));
  };
  std::vector<RestrictedCoordinate> out;
  switch (kind) {
    case RestrictionKind::BinomialThinning:
    case RestrictionKind::PoissonThinning:
    case RestrictionKind::GeometricThinning: {
      if (!inar) throw mismatch();
      const Link link = kind == RestrictionKind::BinomialThinning  ? Link::Binomial
                        : kind == RestrictionKind::PoissonThinning ? Link::Identity
                                                                   : Link::Geometric;
      for (int h = 1; h <= family.lags; ++h) out.push_back({h, h, link});
      break;
    }
    case RestrictionKind::EquidispersedError:
      out.push_back({0, 0, Link::Identity});
      break;
    case RestrictionKind::EqualAlpha:
      if (inar) throw mismatch();
      out.push_back({1, 1, Link::Identity});
      break;
    case RestrictionKind::EqualBeta:
      if (inar) throw mismatch();
      out.push_back({2, 2, Link::Identity});
      break;
    case RestrictionKind::FullEqual:
      if (inar) throw mismatch();
      for (int i = 0; i < 3; ++i) out.push_back({i, i, Link::Identity});
      break;
  }
  return out;
}

}  // namespace

RestrictionValue restriction_map(RestrictionKind kind, const FilterFamily& family, const Eigen::VectorXd& psi) {
  if (psi.size() != family.psi_size())
    throw Error(fmt::format("psi has {} entries, family '{}' expects {}", psi.size(), family.name(),
                            family.psi_size()));
  const auto coords = atoms(kind, family);
  RestrictionValue out;
  out.values.resize(static_cast<Eigen::Index>(coords.size()));
  out.jacobian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(coords.size()), psi.size());
  for (std::size_t j = 0; j < coords.size(); ++j) {
    const auto& c = coords[j];
    const auto row = static_cast<Eigen::Index>(j);
    out.gamma_indices.push_back(c.gamma_index);
    out.values(row) = link_value(c.link, psi(c.psi_index));
    out.jacobian(row, c.psi_index) = link_derivative(c.link, psi(c.psi_index));
  }
  return out;
}

RestrictionSpec::RestrictionSpec(FilterFamily family, std::vector<RestrictionKind> kinds)
    : family_(family), kinds_(std::move(kinds)) {
  for (auto kind : kinds_) {
    for (const auto& c : atoms(kind, family_)) {
      auto clash = std::find_if(coords_.begin(), coords_.end(),
                                [&](const RestrictedCoordinate& o) { return o.gamma_index == c.gamma_index; });
      if (clash != coords_.end())
        throw Error(fmt::format("restriction set '{}' constrains {} twice", name(),
                                family_.coordinate_names()[family_.psi_size() + c.gamma_index]));
      coords_.push_back(c);
    }
  }
  std::sort(coords_.begin(), coords_.end(),
            [](const auto& x, const auto& y) { return x.gamma_index < y.gamma_index; });
  for (int j = 0; j < family_.gamma_size(); ++j) {
    bool restricted = std::any_of(coords_.begin(), coords_.end(), [&](const auto& c) { return c.gamma_index == j; });
    if (!restricted) free_.push_back(j);
  }
}

RestrictionSpec RestrictionSpec::parse(const FilterFamily& family, std::string_view text) {
  std::vector<RestrictionKind> kinds;
  if (text.empty() || text == "none") return RestrictionSpec(family, kinds);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto plus = text.find('+', pos);
    if (plus == std::string_view::npos) plus = text.size();
    kinds.push_back(parse_restriction_kind(text.substr(pos, plus - pos)));
    pos = plus + 1;
  }
  return RestrictionSpec(family, kinds);
}

std::string RestrictionSpec::name() const {
  if (kinds_.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    if (i) out += '+';
    out += to_string(kinds_[i]);
  }
  return out;
}

std::vector<std::string> RestrictionSpec::reduced_names() const {
  const auto all = family_.coordinate_names();
  std::vector<std::string> out(all.begin(), all.begin() + family_.psi_size());
  for (int j : free_) out.push_back(all[static_cast<std::size_t>(family_.psi_size() + j)]);
  return out;
}

Eigen::VectorXd RestrictionSpec::expand(const Eigen::VectorXd& reduced) const {
  if (reduced.size() != reduced_size())
    throw Error(fmt::format("restriction '{}' expects {} reduced parameters, got {}", name(), reduced_size(),
                            reduced.size()));
  const int p = family_.psi_size();
  Eigen::VectorXd theta(family_.size());
  theta.head(p) = reduced.head(p);
  for (const auto& c : coords_) theta(p + c.gamma_index) = link_value(c.link, reduced(c.psi_index));
  for (std::size_t j = 0; j < free_.size(); ++j) theta(p + free_[j]) = reduced(p + static_cast<Eigen::Index>(j));
  return theta;
}

Eigen::VectorXd RestrictionSpec::reduce(const Eigen::VectorXd& theta) const {
  if (theta.size() != family_.size())
    throw Error(fmt::format("expected {} parameters, got {}", family_.size(), theta.size()));
  const int p = family_.psi_size();
  Eigen::VectorXd reduced(reduced_size());
  reduced.head(p) = theta.head(p);
  for (std::size_t j = 0; j < free_.size(); ++j) reduced(p + static_cast<Eigen::Index>(j)) = theta(p + free_[j]);
  return reduced;
}

Eigen::MatrixXd RestrictionSpec::jacobian(const Eigen::VectorXd& reduced) const {
  const int p = family_.psi_size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(family_.size(), reduced_size());
  J.topLeftCorner(p, p).setIdentity();
  for (const auto& c : coords_) J(p + c.gamma_index, c.psi_index) = link_derivative(c.link, reduced(c.psi_index));
  for (std::size_t j = 0; j < free_.size(); ++j) J(p + free_[j], p + static_cast<Eigen::Index>(j)) = 1.0;
  return J;
}

Eigen::VectorXd RestrictionSpec::residual(const Eigen::VectorXd& theta) const {
  const int p = family_.psi_size();
  Eigen::VectorXd r(count());
  for (std::size_t j = 0; j < coords_.size(); ++j) {
    const auto& c = coords_[j];
    r(static_cast<Eigen::Index>(j)) = theta(p + c.gamma_index) - link_value(c.link, theta(c.psi_index));
  }
  return r;
}

Eigen::MatrixXd RestrictionSpec::residual_jacobian(const Eigen::VectorXd& theta) const {
  const int p = family_.psi_size();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(count(), family_.size());
  for (std::size_t j = 0; j < coords_.size(); ++j) {
    const auto& c = coords_[j];
    const auto row = static_cast<Eigen::Index>(j);
    R(row, p + c.gamma_index) = 1.0;
    R(row, c.psi_index) = -link_derivative(c.link, theta(c.psi_index));
  }
  return R;
}

ParamVector apply_restriction(const RestrictionSpec& spec, const Eigen::VectorXd& reduced) {
  return ParamVector::from_theta(spec.family(), spec.expand(reduced));
}

}  // namespace pvq
