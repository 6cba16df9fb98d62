#include <string>

#include "fednids/federation.hpp"
#include "fednids/random.hpp"

namespace fednids {
namespace {

Eigen::VectorXd random_direction(Rng& rng, Eigen::Index dim) {
  Eigen::VectorXd u(dim);
  do {
    for (Eigen::Index i = 0; i < dim; ++i) u[i] = rng.normal();
  } while (u.norm() == 0.0);
  return u.normalized();
}

}  // namespace

std::vector<Organisation> make_synthetic_orgs(int k, std::size_t n_per_org, double separation,
                                              std::uint64_t seed) {
  if (k < 1) throw FederationError("make_synthetic_orgs: need at least one organisation");
  if (n_per_org < 4) throw FederationError("make_synthetic_orgs: need at least 4 rows per organisation");
  if (!(separation >= 0.0)) throw FederationError("make_synthetic_orgs: separation must be >= 0");

  const auto dim = static_cast<Eigen::Index>(kRetainedFeatureCount);
  FlowSchema schema;
  for (Eigen::Index j = 0; j < dim; ++j) schema.feature_names.push_back("f" + std::to_string(j));

  std::vector<Organisation> orgs;
  for (int i = 0; i < k; ++i) {
    const auto id = "org" + std::to_string(i + 1);
    const auto org_seed = derive_seed(seed, "synthetic/" + id);
    Rng rng(org_seed);
    const Eigen::VectorXd centre = separation * random_direction(rng, dim);

    const auto n = static_cast<Eigen::Index>(n_per_org);
    const auto n_benign = n / 2;
    FeatureMatrix features(n, dim);
    std::vector<int> labels(n_per_org);
    std::vector<std::string> categories(n_per_org);
    for (Eigen::Index r = 0; r < n; ++r) {
      const bool attack = r >= n_benign;
      for (Eigen::Index c = 0; c < dim; ++c) {
        features(r, c) = rng.normal() + (attack ? centre[c] : 0.0);
      }
      labels[static_cast<std::size_t>(r)] = attack ? 1 : 0;
      categories[static_cast<std::size_t>(r)] = attack ? "Attack" : schema.benign_marker;
    }
    auto table = make_flow_table(schema, std::move(features), std::move(labels), std::move(categories));
    auto split = split_train_test(table, 0.7, derive_seed(org_seed, "split"));
    orgs.push_back(make_organisation(id, std::move(split.train), std::move(split.test)));
  }
  return orgs;
}

FlowTable make_synthetic_flows(std::size_t benign_rows, std::size_t attack_rows, double separation,
                               std::uint64_t seed) {
  static const std::string kAttackCategories[] = {"DoS", "Reconnaissance", "Exploits"};
  auto schema = FlowSchema::netflow_v2();
  const auto n_cols = static_cast<Eigen::Index>(schema.feature_names.size());
  const auto n = static_cast<Eigen::Index>(benign_rows + attack_rows);

  Rng rng(seed);
  const auto dim = static_cast<Eigen::Index>(kRetainedFeatureCount);
  const Eigen::VectorXd centre = separation * random_direction(rng, dim);

  FeatureMatrix features(n, n_cols);
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<std::string> categories(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const bool attack = r >= static_cast<Eigen::Index>(benign_rows);
    Eigen::Index retained = 0;
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      const auto& name = schema.feature_names[static_cast<std::size_t>(c)];
      if (name == "IPV4_SRC_ADDR" || name == "IPV4_DST_ADDR") {
        features(r, c) = static_cast<double>(0x0A000000u + rng.below(1u << 16));
      } else if (name == "L4_SRC_PORT" || name == "L4_DST_PORT") {
        features(r, c) = static_cast<double>(rng.below(65536));
      } else {
        features(r, c) = rng.normal() + (attack ? centre[retained] : 0.0);
        ++retained;
      }
    }
    labels[static_cast<std::size_t>(r)] = attack ? 1 : 0;
    categories[static_cast<std::size_t>(r)] =
        attack ? kAttackCategories[rng.below(std::size(kAttackCategories))] : schema.benign_marker;
  }
  return make_flow_table(std::move(schema), std::move(features), std::move(labels),
                         std::move(categories));
}

}  // namespace fednids
