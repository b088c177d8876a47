#include "bdwalk/chain.hpp"

#include <cmath>
#include <algorithm>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "bdwalk/errors.hpp"

namespace bdwalk {

ChainSpec::ChainSpec(RateFn birth, RateFn death, std::string description)
    : birth_(std::move(birth)), death_(std::move(death)), description_(std::move(description)) {
  if (!birth_ || !death_) throw std::invalid_argument("ChainSpec: empty rate function");
}

ChainSpec ChainSpec::constant(double birth, double death) {
  std::ostringstream d;
  d.precision(17);
  d << "constant(lambda=" << birth << ", mu=" << death << ")";
  return ChainSpec([birth](std::int64_t) { return birth; }, [death](std::int64_t) { return death; },
                   d.str());
}

ChainSpec ChainSpec::from_ratio(std::function<double(std::int64_t)> ratio, double birth0,
                                std::string description) {
  auto r = std::make_shared<std::function<double(std::int64_t)>>(std::move(ratio));
  return ChainSpec(
      [r, birth0](std::int64_t n) {
        if (n == 0) return birth0;
        const double q = (*r)(n);
        return q / (1.0 + q);
      },
      [r](std::int64_t n) { return 1.0 / (1.0 + (*r)(n)); }, std::move(description));
}

ChainSpec ChainSpec::diagonal(const DriftFunction& f, std::int64_t valid_from) {
  auto shared = std::make_shared<DriftFunction>(f);
  return ChainSpec(
      [shared, valid_from](std::int64_t n) {
        if (n == 0) return 1.0;
        return n < valid_from ? 0.5 : 0.5 + shared->diagonal(n);
      },
      [shared, valid_from](std::int64_t n) {
        return n < valid_from ? 0.5 : 0.5 - shared->diagonal(n);
      },
      "diagonal(" + f.family() + ")");
}

ChainSpec ChainSpec::tabulated(std::vector<double> birth, std::vector<double> death) {
  if (birth.empty() || death.size() < 2) {
    throw std::invalid_argument("ChainSpec::tabulated: need lambda_0 and mu_1 at least");
  }
  auto b = std::make_shared<const std::vector<double>>(std::move(birth));
  auto d = std::make_shared<const std::vector<double>>(std::move(death));
  return ChainSpec(
      [b](std::int64_t n) {
        return (*b)[std::min<std::size_t>(static_cast<std::size_t>(n), b->size() - 1)];
      },
      [d](std::int64_t n) {
        return (*d)[std::min<std::size_t>(static_cast<std::size_t>(n), d->size() - 1)];
      },
      "tabulated");
}

double ChainSpec::log_ratio(std::int64_t n) const {
  const double lam = birth(n);
  const double mu = death(n);
  if (!(lam > 0) || !(mu > 0) || !std::isfinite(lam) || !std::isfinite(mu)) {
    std::ostringstream msg;
    msg << description_ << ": rates at n=" << n << " must be positive (lambda=" << lam
        << ", mu=" << mu << ")";
    throw InvalidChain(msg.str());
  }
  return std::log(mu) - std::log(lam);
}

ChainSpec ChainSpec::scaled(double k) const {
  if (!(k > 0)) throw std::invalid_argument("ChainSpec::scaled: factor must be positive");
  return ChainSpec([b = birth_, k](std::int64_t n) { return k * b(n); },
                   [d = death_, k](std::int64_t n) { return k * d(n); }, description_);
}

}  // namespace bdwalk
