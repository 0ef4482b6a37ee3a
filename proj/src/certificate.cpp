#include "ksproof/certificate.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <numbers>
#include <sstream>

namespace ksproof {

using nlohmann::json;
using rnd::add_up;
using rnd::mul_up;

namespace {

const char* kNormConvention =
    "errors refer to u(x) = sum_k a_k sin(kx) on (-pi, pi): ||u||_L2^2 = pi * sum a_k^2, "
    "||u||_C0 <= sum |a_k|; with the field written as u_t = -nu u_xxxx - u_xx + 2 u u_x the PDE "
    "solution is -2 sum a_k sin(kx), so its errors are twice these";

const char* kRounding =
    "binary64 round-to-nearest; every operation widened outward by at most one ulp using "
    "error-free transformations (TwoSum, fma residuals)";

json hexv(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(to_hex(x));
  return a;
}

std::vector<double> unhexv(const json& a) {
  std::vector<double> v;
  for (const auto& x : a) v.push_back(from_hex(x.get<std::string>()));
  return v;
}

json ivec(const IntervalVector& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(interval_json(x));
  return a;
}

IntervalVector univec(const json& a) {
  IntervalVector v;
  for (const auto& x : a) v.push_back(interval_from_json(x));
  return v;
}

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json interval_json(const Interval& x) {
  return json{{"hex", {to_hex(x.lo()), to_hex(x.hi())}}, {"approx", {x.lo(), x.hi()}}};
}

Interval interval_from_json(const json& j) {
  const auto& h = j.at("hex");
  return Interval(from_hex(h.at(0).get<std::string>()), from_hex(h.at(1).get<std::string>()));
}

json bounds_json(const SelfConsistentBounds& b) {
  IntervalVector modes;
  for (int k = 1; k <= b.M(); ++k) modes.push_back(b.mode(k));
  return {{"modes", ivec(modes)},
          {"tail", {{"C", to_hex(b.tail().C)}, {"C_approx", b.tail().C}, {"s", b.tail().s}}}};
}

ErrorNorms error_norms(const IsolatingBlock& block, const SelfConsistentBounds& b) {
  ErrorNorms e;
  const EigenFrame& f = block.frame;
  int m = f.m();
  for (int i = 0; i < m; ++i) {
    Interval acc(0.0);
    for (int j = 0; j < m; ++j) acc += Interval(f.V(i, j)) * block.slot_bounds[j];
    e.radii.push_back(abs_max(acc));
  }
  for (int k = m + 1; k <= b.M(); ++k) e.radii.push_back(b.mode_abs(k));
  const auto& t = b.tail();
  double c2 = mul_up(t.C, t.C);
  e.tail_l2_sq = t.C == 0 ? 0.0 : mul_up(c2, tail_sum_up(b.M(), 2 * t.s));
  e.tail_c0 = t.C == 0 ? 0.0 : mul_up(t.C, tail_sum_up(b.M(), t.s));
  double sq = 0, ab = 0;
  for (double r : e.radii) {
    sq = add_up(sq, mul_up(r, r));
    ab = add_up(ab, r);
  }
  sq = add_up(sq, e.tail_l2_sq);
  double pi_up = rnd::next_up(std::numbers::pi);
  e.l2 = rnd::sqrt_up(mul_up(pi_up, sq));
  e.c0 = add_up(ab, e.tail_c0);
  return e;
}

ProofCertificate certify(const EigenFrame& frame, const SelfConsistentBounds& bounds,
                         const IsolatingBlock& block, const ConleyData& conley, const C4aReport& c4a,
                         const BlockOptions& opt) {
  ProofCertificate c;
  c.bounds = bounds;
  c.block = block;
  c.block.frame = frame;
  c.c13 = verify_c1_c3(bounds);
  c.c4a = c4a;
  c.conley = conley;
  ErrorNorms e = error_norms(c.block, bounds);
  c.l2_error = e.l2;
  c.c0_error = e.c0;
  c.block_options = opt;
  c.timestamp = utc_now();
  return c;
}

json to_json(const ProofCertificate& c, bool with_timestamp) {
  const Parameters& p = c.params();
  const EigenFrame& f = c.block.frame;
  json j;
  j["schema_version"] = kCertificateSchema;
  j["kind"] = "ks-odd-equilibrium";
  j["label"] = c.label;
  j["parameters"] = {{"nu", to_hex(p.nu)},
                     {"nu_decimal", p.nu},
                     {"nu_enclosure", interval_json(p.nu_enclosure())},
                     {"m", p.m},
                     {"M", p.M}};
  j["candidate"] = {{"hex", hexv(f.candidate)}, {"approx", f.candidate}};

  j["bounds"] = bounds_json(c.bounds);

  json V = json::array();
  for (int i = 0; i < f.m(); ++i) {
    std::vector<double> row;
    for (int k = 0; k < f.m(); ++k) row.push_back(f.V(i, k));
    V.push_back(hexv(row));
  }
  json slots = json::array();
  for (const auto& s : f.slots) {
    json o = {{"type", s.complex ? "complex" : "real"}, {"index", s.index}, {"re", to_hex(s.re)},
              {"re_approx", s.re}};
    if (s.complex) {
      o["im"] = to_hex(s.im);
      o["im_approx"] = s.im;
    }
    slots.push_back(o);
  }
  j["frame"] = {{"V", V}, {"slots", slots}, {"condition", f.condition}, {"residual", f.residual}};

  json faces = json::array();
  for (const auto& fm : c.block.faces)
    faces.push_back({{"slot", fm.slot},
                     {"side", fm.side},
                     {"margin", to_hex(fm.margin)},
                     {"margin_approx", fm.margin},
                     {"pieces", fm.pieces},
                     {"depth", fm.depth}});
  const BlockOptions& o = c.block_options;
  j["block"] = {{"trial_box", ivec(c.block.trial_box)},
                {"slot_bounds", ivec(c.block.slot_bounds)},
                {"radii", hexv(c.block.radii)},
                {"faces", faces},
                {"verified", c.block.verified},
                {"options",
                 {{"max_depth", o.max_depth},
                  {"annulus", to_hex(o.annulus)},
                  {"widen", to_hex(o.widen)},
                  {"symmetric_remainder", o.symmetric_remainder}}}};

  j["c1_c3"] = {{"c1", c.c13.c1},
                {"c2", c.c13.c2},
                {"c3", "structural: polynomial vector field, continuous on the bound set"},
                {"sum_sq_bound", to_hex(c.c13.sum_sq_bound)}};
  j["c4a"] = {{"margin_upper", hexv(c.c4a.margin_upper)},
              {"margin_lower", hexv(c.c4a.margin_lower)},
              {"dir", c.c4a.dir},
              {"tail_D", to_hex(c.c4a.tail_D)},
              {"tail_margin", to_hex(c.c4a.tail_margin)},
              {"min_margin_approx", c.c4a.min_margin()},
              {"verified", c.c4a.verified}};
  j["conley"] = {{"q", c.conley.q},
                 {"d", c.conley.d},
                 {"tail_dir", c.conley.tail_dir},
                 {"dir", c.conley.dir},
                 {"homology", c.conley.homology}};
  j["errors"] = {{"l2", to_hex(c.l2_error)},
                 {"c0", to_hex(c.c0_error)},
                 {"l2_approx", c.l2_error},
                 {"c0_approx", c.c0_error},
                 {"norm_convention", kNormConvention}};
  json meta = {{"library", "ksproof 1.0"},
               {"compiler", __VERSION__},
               {"rounding", kRounding},
               {"run_options", c.run_options},
               {"notes",
                {"convolution bound for k > 2M uses the three per-term estimates (far head-tail "
                 "products, pure tail products, middle square), not the condensed k-free form",
                 "tail condition C4a is checked with a uniform per-term dissipativity constant at "
                 "k = M+1; refinement may use the closed-form constant",
                 "the proof covers every viscosity in parameters.nu_enclosure"}}};
  if (with_timestamp) meta["timestamp"] = c.timestamp;
  j["metadata"] = meta;
  return j;
}

ProofCertificate certificate_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kCertificateSchema)
    throw std::invalid_argument("unsupported certificate schema version");
  ProofCertificate c;
  const auto& jp = j.at("parameters");
  Parameters p(from_hex(jp.at("nu").get<std::string>()), jp.at("m").get<int>(), jp.at("M").get<int>());
  IntervalVector modes = univec(j.at("bounds").at("modes"));
  if (static_cast<int>(modes.size()) != p.M) throw std::invalid_argument("mode count differs from M");
  IntervalVector head(modes.begin(), modes.begin() + p.m), mid(modes.begin() + p.m, modes.end());
  const auto& jt = j.at("bounds").at("tail");
  c.bounds = SelfConsistentBounds(p, head, mid,
                                  TailDecay(from_hex(jt.at("C").get<std::string>()), jt.at("s").get<int>()));

  EigenFrame f;
  f.candidate = unhexv(j.at("candidate").at("hex"));
  int m = p.m;
  if (static_cast<int>(f.candidate.size()) != m) throw std::invalid_argument("candidate length differs from m");
  f.V = Eigen::MatrixXd::Zero(m, m);
  const auto& V = j.at("frame").at("V");
  for (int i = 0; i < m; ++i) {
    auto row = unhexv(V.at(i));
    for (int k = 0; k < m; ++k) f.V(i, k) = row.at(k);
  }
  for (const auto& s : j.at("frame").at("slots")) {
    EigenSlot es;
    es.complex = s.at("type").get<std::string>() == "complex";
    es.index = s.at("index").get<int>();
    es.re = from_hex(s.at("re").get<std::string>());
    if (es.complex) es.im = from_hex(s.at("im").get<std::string>());
    f.slots.push_back(es);
  }
  f.condition = j.at("frame").value("condition", 0.0);
  f.residual = j.at("frame").value("residual", 0.0);

  const auto& jb = j.at("block");
  c.block.frame = f;
  c.block.trial_box = univec(jb.at("trial_box"));
  c.block.slot_bounds = univec(jb.at("slot_bounds"));
  c.block.radii = unhexv(jb.at("radii"));
  for (const auto& fm : jb.at("faces"))
    c.block.faces.push_back({fm.at("slot").get<int>(), fm.at("side").get<int>(),
                             from_hex(fm.at("margin").get<std::string>()), fm.at("pieces").get<int>(),
                             fm.at("depth").get<int>()});
  c.block.verified = jb.at("verified").get<bool>();
  const auto& jo = jb.at("options");
  c.block_options.max_depth = jo.at("max_depth").get<int>();
  c.block_options.annulus = from_hex(jo.at("annulus").get<std::string>());
  c.block_options.widen = from_hex(jo.at("widen").get<std::string>());
  c.block_options.symmetric_remainder = jo.at("symmetric_remainder").get<bool>();

  const auto& jc = j.at("c4a");
  c.c4a.margin_upper = unhexv(jc.at("margin_upper"));
  c.c4a.margin_lower = unhexv(jc.at("margin_lower"));
  c.c4a.dir = jc.at("dir").get<std::vector<int>>();
  c.c4a.tail_D = from_hex(jc.at("tail_D").get<std::string>());
  c.c4a.tail_margin = from_hex(jc.at("tail_margin").get<std::string>());
  c.c4a.verified = jc.at("verified").get<bool>();

  const auto& jk = j.at("conley");
  c.conley.q = jk.at("q").get<int>();
  c.conley.d = jk.at("d").get<int>();
  c.conley.tail_dir = jk.at("tail_dir").get<int>();
  c.conley.dir = jk.at("dir").get<std::vector<int>>();
  c.conley.homology = jk.at("homology").get<std::string>();

  const auto& j13 = j.at("c1_c3");
  c.c13.c1 = j13.at("c1").get<bool>();
  c.c13.c2 = j13.at("c2").get<bool>();
  c.c13.sum_sq_bound = from_hex(j13.at("sum_sq_bound").get<std::string>());

  c.l2_error = from_hex(j.at("errors").at("l2").get<std::string>());
  c.c0_error = from_hex(j.at("errors").at("c0").get<std::string>());
  c.label = j.value("label", "");
  if (j.contains("metadata")) {
    c.timestamp = j["metadata"].value("timestamp", "");
    c.run_options = j["metadata"].value("run_options", json::object());
  }
  return c;
}

CheckResult check_certificate(const json& j) {
  CheckResult r;
  auto fail = [&](const std::string& s) { r.problems.push_back(s); };
  ProofCertificate c;
  try {
    c = certificate_from_json(j);
    c.params().validate();
  } catch (const std::exception& e) {
    fail(std::string("unreadable certificate: ") + e.what());
    return r;
  }
  const SelfConsistentBounds& b = c.bounds;
  int m = c.params().m;

  C13Report c13 = verify_c1_c3(b);
  if (!c13.c1) fail("C1 fails: tail constant must be positive");
  if (!c13.c2) fail("C2 fails: sum of squared bounds not finite");

  C4aReport c4a = verify_c4a(b);
  if (!c4a.verified) fail(c4a.first_failure(m).empty() ? "C4a fails" : c4a.first_failure(m));
  if (c4a.margin_upper != c.c4a.margin_upper || c4a.margin_lower != c.c4a.margin_lower ||
      c4a.tail_margin != c.c4a.tail_margin || c4a.tail_D != c.c4a.tail_D)
    fail("recomputed C4a margins differ from the stored ones");

  IsolatingBlock blk = c.block;
  try {
    IntervalVector img = block_in_modes(blk.frame, blk.trial_box);
    for (int i = 0; i < m; ++i)
      if (!contains(b.mode(i + 1), img[i])) fail("T(W~) not inside W at mode " + std::to_string(i + 1));
    for (int i = 0; i < m; ++i)
      if (!contains(blk.trial_box[i], blk.slot_bounds[i]))
        fail("block not inside the trial box at coordinate " + std::to_string(i));
    for (size_t si = 0; si < blk.frame.slots.size(); ++si) {
      const auto& s = blk.frame.slots[si];
      if (s.complex && !(blk.slot_bounds[s.index] == Interval::symmetric(blk.radii[si])))
        fail("complex slot bounds disagree with the stored radius");
    }
    auto faces = verify_block(blk, b, c.block_options);
    if (!blk.verified) fail("face transversality not re-established");
    if (faces.size() != c.block.faces.size()) {
      fail("face count differs");
    } else {
      for (size_t i = 0; i < faces.size(); ++i)
        if (faces[i].margin != c.block.faces[i].margin) fail("face margin " + std::to_string(i) + " differs");
    }
    ConleyData cd = conley_index(blk, c4a);
    if (cd.q != c.conley.q || cd.homology != c.conley.homology) fail("Conley index data differs");
    ErrorNorms e = error_norms(blk, b);
    if (!(e.l2 <= c.l2_error)) fail("stated L2 error is smaller than the recomputed bound");
    if (!(e.c0 <= c.c0_error)) fail("stated C0 error is smaller than the recomputed bound");
    r.min_margin = std::min(blk.min_margin(), c4a.min_margin());
  } catch (const std::exception& ex) {
    fail(std::string("verification error: ") + ex.what());
  }
  r.ok = r.problems.empty();
  return r;
}

}  // namespace ksproof
