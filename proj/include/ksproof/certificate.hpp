#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "ksproof/block.hpp"
#include "ksproof/bounds.hpp"

namespace ksproof {

constexpr int kCertificateSchema = 1;

struct ErrorNorms {
  std::vector<double> radii;  // |a_k - candidate_k| bounds, k = 1..M
  double tail_l2_sq = 0;      // sum_{k>M} (C/k^s)^2 bound
  double tail_c0 = 0;         // sum_{k>M} C/k^s bound
  double l2 = 0;
  double c0 = 0;
};

// Norms of u = sum a_k sin(kx) on (-pi, pi): ||u||_2^2 = pi sum a_k^2 and
// ||u||_inf <= sum |a_k|.
ErrorNorms error_norms(const IsolatingBlock& block, const SelfConsistentBounds& b);

struct ProofCertificate {
  SelfConsistentBounds bounds;
  IsolatingBlock block;
  C13Report c13;
  C4aReport c4a;
  ConleyData conley;
  double l2_error = 0;
  double c0_error = 0;
  BlockOptions block_options;
  nlohmann::json run_options = nlohmann::json::object();
  std::string timestamp;
  std::string label;

  const Parameters& params() const { return bounds.params(); }
};

ProofCertificate certify(const EigenFrame& frame, const SelfConsistentBounds& bounds,
                         const IsolatingBlock& block, const ConleyData& conley, const C4aReport& c4a,
                         const BlockOptions& opt = {});

nlohmann::json to_json(const ProofCertificate& cert, bool with_timestamp = true);
// Parses the stored data without re-verifying anything.
ProofCertificate certificate_from_json(const nlohmann::json& j);

struct CheckResult {
  bool ok = false;
  std::vector<std::string> problems;
  double min_margin = 0;
};

// Recomputes C1-C3, C4a, every face margin, the index and both error norms
// from the serialized data and compares them with the stored values.
CheckResult check_certificate(const nlohmann::json& j);

nlohmann::json interval_json(const Interval& x);
// {"modes": [...], "tail": {...}} as stored in certificates.
nlohmann::json bounds_json(const SelfConsistentBounds& b);
Interval interval_from_json(const nlohmann::json& j);

}  // namespace ksproof
