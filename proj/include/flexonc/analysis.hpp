#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flexonc {

/// Idealized route: per-link success p, N forwarders per hop, H hops, m coding partners.
struct DeliveryParams
{
  double p = 1.0;
  unsigned N = 1;
  unsigned H = 1;
  unsigned m = 1;

  void validate() const;
};

/// 1 - (1-p)^N
double p_forward_native(const DeliveryParams& d);
/// (1 - (1-p)^N)^(H-1) * p
double p_deliver_native(const DeliveryParams& d);
/// (1 - (1-p)^N) * (p^m)^(H-1)
double p_deliver_coded_bend(const DeliveryParams& d);
/// (1 - (1-p)^N) * (1 - (1-p^m)^N)^(H-2) * p^m, for H >= 2
double p_deliver_coded_flexonc(const DeliveryParams& d);

enum class DeliveryModel { native, bend_coded, flexonc_coded };

std::string to_string(DeliveryModel m);
double closed_form(const DeliveryParams& d, DeliveryModel model);

struct Estimate
{
  double mean = 0.0;
  double stderr_ = 0.0;              // from the sample proportion
  std::uint64_t trials = 0;
};

/// Hop-by-hop Bernoulli simulation of the idealized model. Every forwarder of a hop draws its
/// own link outcome; a coded hop needs all m partners at one forwarder (success p^m).
Estimate monte_carlo_delivery(const DeliveryParams& d, DeliveryModel model, std::uint64_t trials,
                              std::uint64_t seed);

/*------------------------------------------------------------------------------------------------*/

struct GridSpec
{
  std::vector<double> p{0.6, 0.7, 0.8, 0.9, 0.99};
  std::vector<unsigned> N{1, 2, 3};
  std::vector<unsigned> H{2, 3, 5};
  std::vector<unsigned> m{1, 2, 3};

  void validate() const;
  std::vector<DeliveryParams> points() const;
};

struct Violation
{
  DeliveryParams params;
  std::string what;
};

struct InequalityReport
{
  std::size_t strict_checked = 0;      // points where FlexONC > BEND must hold
  std::size_t equal_checked = 0;       // boundary points where both must coincide
  std::size_t gap_checked = 0;         // (N, H, m) series checked for a non-increasing gap
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Strict FlexONC > BEND where 0 < p < 1, N > 1, H > 2 and p^m < 1; exact equality at p = 1 and
/// at N = 1; and FlexONC - BEND non-increasing in p on a dense grid over [p0, 1].
InequalityReport verify_inequality(const std::vector<DeliveryParams>& grid, double p0 = 0.95,
                                   unsigned dense_steps = 200);

struct AgreementRow
{
  DeliveryParams params;
  DeliveryModel model = DeliveryModel::native;
  double exact = 0.0;
  Estimate estimate;
  /// |estimate - exact| in units of sqrt(exact (1 - exact) / trials).
  double z = 0.0;
};

/// Closed form against Monte-Carlo for every grid point and model. Seeds derive from `seed`
/// and the point, so rows are reproducible one by one.
std::vector<AgreementRow> cross_validate(const std::vector<DeliveryParams>& grid,
                                         std::uint64_t trials, std::uint64_t seed,
                                         unsigned jobs = 1);

} // namespace flexonc
