#pragma once

#include <string>
#include <string_view>

namespace acsbm {

enum class LinkKind { identity, log, logit, probit };

/// Known link function g of the additive-covariate model. `forward` maps a
/// probability to the linear-predictor scale, `inverse` maps back.
class LinkFunction {
 public:
  constexpr LinkFunction() = default;
  constexpr explicit LinkFunction(LinkKind kind) : kind_(kind) {}

  constexpr LinkKind kind() const noexcept { return kind_; }

  double forward(double p) const;
  double inverse(double x) const;

  std::string_view name() const noexcept;

  // Accepts "identity", "log", "logit", "probit"; throws ConfigError otherwise.
  static LinkFunction parse(std::string_view name);

  friend constexpr bool operator==(LinkFunction a, LinkFunction b) noexcept {
    return a.kind_ == b.kind_;
  }

 private:
  LinkKind kind_ = LinkKind::log;
};

}  // namespace acsbm
