#include <array>
#include <sstream>
#include <string>
#include <utility>

#include "msl/scaling.hpp"

namespace msl::scaling {
namespace {

constexpr std::array<std::pair<ScalingKind, std::string_view>, 10> kNames = {{
    {ScalingKind::Cms, "cms"},
    {ScalingKind::UniformLft, "uniform_lft"},
    {ScalingKind::StiffnessProportionalLft, "stiffness_proportional_lft"},
    {ScalingKind::PolynomialSms, "polynomial_sms"},
    {ScalingKind::GlobalDeflation, "global_deflation"},
    {ScalingKind::LocalDeflationS1, "local_deflation_s1"},
    {ScalingKind::LocalDeflationS2, "local_deflation_s2"},
    {ScalingKind::Olovsson, "olovsson"},
    {ScalingKind::Hoffmann, "hoffmann"},
    {ScalingKind::EigStabilization, "eig_stabilization"},
}};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidParameter, what);
}

}  // namespace

std::string_view to_string(ScalingKind kind) noexcept {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ScalingKind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw Error(Errc::InvalidParameter, "unknown scaling kind '" + std::string(name) + "'");
}

bool ScalingSpec::is_local() const noexcept {
  switch (kind) {
    case ScalingKind::Cms:
    case ScalingKind::LocalDeflationS1:
    case ScalingKind::LocalDeflationS2:
    case ScalingKind::Olovsson:
    case ScalingKind::Hoffmann:
    case ScalingKind::EigStabilization:
      return true;
    default:
      return false;
  }
}

void ScalingSpec::validate() const {
  switch (kind) {
    case ScalingKind::Cms:
      require(alpha >= 1.0, "CMS factor alpha must be >= 1");
      if (selector) {
        if (selector->empty()) throw Error(Errc::EmptySelection, "CMS selector picks no entries");
        for (Index i : *selector) require(i >= 0, "CMS selector index must be nonnegative");
      }
      break;
    case ScalingKind::UniformLft:
      require(mu > 0.0, "uniform scaling factor mu must be > 0");
      break;
    case ScalingKind::StiffnessProportionalLft:
      require(mu >= 0.0, "stiffness-proportional mu must be >= 0");
      break;
    case ScalingKind::PolynomialSms:
      require(c >= 0.0, "polynomial coefficient c must be >= 0");
      break;
    case ScalingKind::GlobalDeflation:
      require(rank >= 0, "rank must be >= 0");
      require(deflation_mode == DeflationMode::Shave || alpha >= 0.0, "cutoff alpha must be >= 0");
      break;
    case ScalingKind::LocalDeflationS1:
      require(rank >= 0, "rank must be >= 0");
      require(alpha >= 0.0, "S1 alpha must be >= 0");
      break;
    case ScalingKind::LocalDeflationS2:
      require(rank >= 0, "rank must be >= 0");
      break;
    case ScalingKind::Olovsson:
    case ScalingKind::Hoffmann:
      require(beta >= 0.0, "beta must be >= 0");
      break;
    case ScalingKind::EigStabilization:
      require(rank >= 0, "rank must be >= 0");
      require(epsilon >= 0.0, "epsilon must be >= 0");
      break;
  }
}

std::string ScalingSpec::label() const {
  std::ostringstream os;
  os << to_string(kind) << '(';
  switch (kind) {
    case ScalingKind::Cms:
      os << "alpha=" << alpha << (selector ? ",selected" : ",all");
      break;
    case ScalingKind::UniformLft:
    case ScalingKind::StiffnessProportionalLft:
      os << "mu=" << mu;
      break;
    case ScalingKind::PolynomialSms:
      os << "c=" << c;
      break;
    case ScalingKind::GlobalDeflation:
      os << "r=" << rank;
      if (deflation_mode == DeflationMode::Cutoff) os << ",alpha=" << alpha;
      else os << ",shave";
      break;
    case ScalingKind::LocalDeflationS1:
      os << "r=" << rank << ",alpha=" << alpha;
      break;
    case ScalingKind::LocalDeflationS2:
      os << "r=" << rank;
      break;
    case ScalingKind::Olovsson:
    case ScalingKind::Hoffmann:
      os << "beta=" << beta;
      break;
    case ScalingKind::EigStabilization:
      os << "r=" << rank << ",eps=" << epsilon;
      break;
  }
  os << ')';
  return os.str();
}

ScalingSpec ScalingSpec::none() { return cms(1.0); }

ScalingSpec ScalingSpec::cms(double alpha, std::optional<std::vector<Index>> selector) {
  ScalingSpec s;
  s.kind = ScalingKind::Cms;
  s.alpha = alpha;
  s.selector = std::move(selector);
  return s;
}

ScalingSpec ScalingSpec::uniform_lft(double mu) {
  ScalingSpec s;
  s.kind = ScalingKind::UniformLft;
  s.mu = mu;
  return s;
}

ScalingSpec ScalingSpec::stiffness_proportional(double mu) {
  ScalingSpec s;
  s.kind = ScalingKind::StiffnessProportionalLft;
  s.mu = mu;
  return s;
}

ScalingSpec ScalingSpec::polynomial(double c) {
  ScalingSpec s;
  s.kind = ScalingKind::PolynomialSms;
  s.c = c;
  return s;
}

ScalingSpec ScalingSpec::global_deflation(Index r, DeflationMode mode, double alpha) {
  ScalingSpec s;
  s.kind = ScalingKind::GlobalDeflation;
  s.rank = r;
  s.deflation_mode = mode;
  s.alpha = alpha;
  return s;
}

ScalingSpec ScalingSpec::local_deflation_s1(Index r, double alpha) {
  ScalingSpec s;
  s.kind = ScalingKind::LocalDeflationS1;
  s.rank = r;
  s.alpha = alpha;
  return s;
}

ScalingSpec ScalingSpec::local_deflation_s2(Index r) {
  ScalingSpec s;
  s.kind = ScalingKind::LocalDeflationS2;
  s.rank = r;
  return s;
}

ScalingSpec ScalingSpec::olovsson(double beta, OlovssonVariant v) {
  ScalingSpec s;
  s.kind = ScalingKind::Olovsson;
  s.beta = beta;
  s.olovsson_variant = v;
  return s;
}

ScalingSpec ScalingSpec::hoffmann(double beta) {
  ScalingSpec s;
  s.kind = ScalingKind::Hoffmann;
  s.beta = beta;
  return s;
}

ScalingSpec ScalingSpec::eig_stabilization(Index r, double epsilon) {
  ScalingSpec s;
  s.kind = ScalingKind::EigStabilization;
  s.rank = r;
  s.epsilon = epsilon;
  return s;
}

}  // namespace msl::scaling
