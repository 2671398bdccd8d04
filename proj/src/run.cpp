#include "nkit/run.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "nkit/connection.hpp"
#include "nkit/corpus.hpp"

namespace nkit {
namespace {

using nlohmann::json;

const std::vector<std::string>& canonical_order() {
  static const std::vector<std::string> order = {
      "selftest",   "nygaard", "graded", "ht",   "check-theorem", "connection",
      "conj-theta", "check-prop", "split", "rees", "sen"};
  return order;
}

json zmat_json(const ZMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(std::to_string(m.at(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json profile_json(int index, const DivisorProfile& pr) {
  json out;
  out["i"] = index;
  out["free_rank"] = pr.free_rank;
  out["torsion"] = pr.torsion;
  return out;
}

json gr_table(const GradedReport& rep) {
  json out = json::array();
  for (int i = 0; i < rep.i_max; ++i) out.push_back(profile_json(i, rep.gr[i]));
  return out;
}

// Lazily built pipeline state shared by the commands of one run.
struct Pipeline {
  InstanceDoc doc;

  std::optional<BKModule> bk_mod;
  std::optional<NygaardFiltration> nyg_fil;
  std::optional<GradedReport> gr_rep;
  std::optional<HTWeights> ht_w;
  std::optional<ConnectionMatrix> conn;
  std::optional<ConjThetaExport> cte;
  std::optional<FilteredThetaModule> ftm_mod;
  std::optional<GradedWeylModule> weyl_mod;
  std::optional<ReesFiltration> rees_fil;

  const BKSpec& spec() {
    if (!doc.bk) throw Error(ErrorKind::usage, "command requires a bk payload");
    return *doc.bk;
  }
  const BKModule& bk() {
    if (!bk_mod) {
      if (doc.N < 8)
        throw Error(ErrorKind::precision, "the filtration pipeline requires N >= 8");
      BKModule m = instantiate(spec());
      validate_bk(m);
      bk_mod = std::move(m);
    }
    return *bk_mod;
  }
  int window() {
    int def = default_i_max(bk());
    return doc.i_max >= 1 ? doc.i_max : def;
  }
  const NygaardFiltration& nyg() {
    if (!nyg_fil) nyg_fil = nygaard(bk(), window());
    return *nyg_fil;
  }
  const GradedReport& gr() {
    if (!gr_rep) gr_rep = graded(hodge_fil(bk(), nyg()));
    return *gr_rep;
  }
  const HTWeights& ht() {
    if (!ht_w) ht_w = ht_weights(gr());
    return *ht_w;
  }
  const ConnectionMatrix& connection() {
    if (!conn) {
      bk();  // enforce the precision floor and the height certificate first
      conn = solve_connection(spec());
    }
    return *conn;
  }
  const ConjThetaExport& conj() {
    if (!cte) cte = conj_theta(spec(), connection(), doc.i_max >= 1 ? doc.i_max : -1);
    return *cte;
  }
  const FilteredThetaModule& ftm() {
    if (!ftm_mod) {
      if (doc.ftm) {
        FilteredThetaModule m = build_ftm(doc);
        auto violations = validate_ftm(m);
        if (!violations.empty())
          throw Error(ErrorKind::containment, "theta module axioms fail at layer " +
                                                  std::to_string(violations.front().index) +
                                                  ": " + violations.front().what);
        ftm_mod = std::move(m);
      } else if (doc.bk) {
        ftm_mod = conj().ftm;
      } else {
        ftm_mod = rees_to_ftm(rees_f());
      }
    }
    return *ftm_mod;
  }
  const GradedWeylModule& weyl() {
    if (!weyl_mod) {
      GradedWeylModule w = build_weyl(doc);
      auto violations = check_weyl(w);
      if (!violations.empty())
        throw Error(ErrorKind::containment, "weyl module axioms fail at degree " +
                                                std::to_string(violations.front().degree) +
                                                ": " + violations.front().what);
      weyl_mod = std::move(w);
    }
    return *weyl_mod;
  }
  const ReesFiltration& rees_f() {
    if (!rees_fil) rees_fil = rees(weyl());
    return *rees_fil;
  }
};

json cmd_nygaard(Pipeline& pl) {
  const NygaardFiltration& nyg = pl.nyg();
  json levels = json::array();
  for (int i = 0; i < static_cast<int>(nyg.level.size()); ++i) {
    const Submodule& lv = nyg.level[i];
    json row;
    row["i"] = i;
    row["ambient"] = lv.ambient();
    row["gens"] = lv.num_gens();
    row["log_size"] = lv.size_exp();
    levels.push_back(std::move(row));
  }
  json out;
  out["i_max"] = nyg.i_max;
  out["levels"] = std::move(levels);
  return out;
}

json cmd_graded(Pipeline& pl) {
  json out;
  out["i_max"] = pl.gr().i_max;
  out["gr"] = gr_table(pl.gr());
  return out;
}

json cmd_ht(Pipeline& pl) {
  const HTWeights& ht = pl.ht();
  json ws = json::array();
  for (const auto& [i, m] : ht.weights) ws.push_back(json::array({i, m}));
  json out;
  out["weights"] = std::move(ws);
  out["total"] = ht.total();
  return out;
}

json cmd_check_theorem(Pipeline& pl, bool& pass) {
  TheoremVerdict tv = check_theorem(pl.gr(), pl.ht(), pl.bk().ctx, pl.bk().assume_crystalline);
  pass = tv.pass;
  json out;
  out["verdict"] = tv.pass ? "PASS" : "FAIL";
  out["crystalline_assumed"] = tv.crystalline_assumed;
  out["offending"] = tv.offending;
  return out;
}

json cmd_connection(Pipeline& pl, bool& pass) {
  const ConnectionMatrix& conn = pl.connection();
  HorizontalityReport hz = verify_horizontality(pl.spec(), conn);
  json gf = json::array();
  bool all_ok = true;
  for (int i = 1; i <= pl.spec().height + 1; ++i) {
    GriffithsReport rep = verify_griffiths(pl.spec(), conn, i);
    all_ok = all_ok && rep.ok;
    json row;
    row["layer"] = rep.layer;
    row["ok"] = rep.ok;
    row["max_denominator"] = rep.max_denominator;
    row["certified_val"] = rep.certified_val;
    gf.push_back(std::move(row));
  }
  pass = hz.zero && all_ok;
  json out;
  out["iterations"] = conn.iterations;
  out["residual_val"] = conn.residual_val;
  out["residual_uorder"] = conn.residual_uorder;
  out["horizontality"] =
      json{{"zero", hz.zero}, {"certified_val", hz.certified_val},
           {"certified_uorder", hz.certified_uorder}};
  out["griffiths"] = std::move(gf);
  out["verdict"] = pass ? "PASS" : "FAIL";
  return out;
}

json cmd_conj_theta(Pipeline& pl, bool& pass) {
  const ConjThetaExport& exp = pl.conj();
  json layers = json::array();
  for (const auto& lay : exp.ftm.layers) {
    json jl;
    jl["index"] = lay.index;
    jl["rank"] = lay.rank();
    jl["inclusion"] = zmat_json(lay.inclusion);
    jl["theta"] = zmat_json(lay.theta);
    layers.push_back(std::move(jl));
  }
  auto violations = validate_ftm(exp.ftm);
  json jv = json::array();
  for (const auto& v : violations) jv.push_back(json{{"index", v.index}, {"what", v.what}});
  json profiles = json::array();
  for (const auto& [i, pr] : ftm_profiles(exp.ftm)) profiles.push_back(profile_json(i, pr));
  pass = violations.empty();
  json out;
  out["i_max"] = static_cast<int>(exp.ftm.layers.size());
  out["layers"] = std::move(layers);
  out["violations"] = std::move(jv);
  out["profiles"] = std::move(profiles);
  out["verdict"] = pass ? "PASS" : "FAIL";
  return out;
}

json cmd_check_prop(Pipeline& pl, bool& pass) {
  PropVerdict pv = check_prop(pl.ftm());
  pass = pv.pass;
  json ht = json::array();
  for (const auto& [i, r] : pv.ht) ht.push_back(json::array({i, r}));
  json out;
  out["verdict"] = pv.pass ? "PASS" : "FAIL";
  out["offending"] = pv.offending;
  out["ht"] = std::move(ht);
  return out;
}

json cmd_split(Pipeline& pl) {
  const FilteredThetaModule& m = pl.ftm();
  json rows = json::array();
  for (int i = m.i_lo() + 1; i <= m.i_hi(); ++i) {
    SplitOutcome so = split_layer(m, i, pl.doc.seed);
    json row;
    row["index"] = i;
    row["ok"] = so.ok;
    if (!so.ok) row["blocking_layer"] = so.blocking_layer;
    rows.push_back(std::move(row));
  }
  DecomposeReport dec = decompose(m);
  json sm = json::array();
  for (const auto& s : dec.summands)
    sm.push_back(json{{"index", s.index}, {"rank", s.gens.rows()}});
  json out;
  out["layers"] = std::move(rows);
  out["summands"] = std::move(sm);
  out["skipped"] = dec.skipped;
  return out;
}

json cmd_rees(Pipeline& pl, bool& pass) {
  const ReesFiltration& f = pl.rees_f();
  json layers = json::array();
  for (int j = 0; j < f.layers(); ++j)
    layers.push_back(json{{"i", f.i_lo + j}, {"rank", f.rank[j]}});
  pass = unrees(f) == pl.weyl();
  json out;
  out["i_lo"] = f.i_lo;
  out["layers"] = std::move(layers);
  out["round_trip"] = pass;
  return out;
}

json cmd_sen(Pipeline& pl) {
  SenModule sm = sen_module(pl.weyl());
  json out;
  out["rank"] = sm.rank;
  out["top_index"] = sm.top_index;
  out["theta"] = zmat_json(sm.theta);
  out["nilpotent"] = nilpotence_check(sm.theta);
  return out;
}

json cmd_escalate(Pipeline& pl, int n2, bool& pass) {
  const BKSpec& spec = pl.spec();
  EscalationReport er = precision_escalate(spec, spec.N, n2, pl.window());
  pass = er.stable;
  json out;
  out["n_low"] = er.n_low;
  out["n_high"] = er.n_high;
  out["stable"] = er.stable;
  out["low_gr"] = gr_table(er.low);
  out["high_gr"] = gr_table(er.high);
  out["verdict"] = pass ? "PASS" : "FAIL";
  return out;
}

void push_check(json& checks, bool& all, const std::string& name, bool pass) {
  checks.push_back(json{{"name", name}, {"pass", pass}});
  all = all && pass;
}

json cmd_selftest(bool& pass) {
  json checks = json::array();
  bool all = true;
  for (std::uint64_t p : {3ull, 5ull}) {
    std::string tag = "-p" + std::to_string(p);
    PrecisionCtx ctx = PrecisionCtx::make(p, 10, 16);
    std::mt19937_64 gen(41 + p);

    bool snf_ok = true;
    for (int trial = 0; trial < 10; ++trial) {
      ZMatrix a(ctx, 4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a.at(i, j) = gen() % ctx.pN;
      SmithForm sf = snf(a);
      snf_ok = snf_ok && is_unimodular(sf.U) && is_unimodular(sf.V);
      snf_ok = snf_ok && (sf.U * a * sf.V == sf.diagonal(ctx, 4, 4));
      snf_ok = snf_ok && std::is_sorted(sf.exps.begin(), sf.exps.end());
    }
    push_check(checks, all, "snf-roundtrip" + tag, snf_ok);

    bool howell_ok = true;
    for (int trial = 0; trial < 5; ++trial) {
      ZMatrix g(ctx, 5, 4);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) g.at(i, j) = gen() % ctx.pN;
      Submodule s = Submodule::from_rows(g);
      for (int i = 0; i < 5; ++i) howell_ok = howell_ok && s.contains(g.row(i));
      howell_ok = howell_ok && (join(s, s) == s);
    }
    push_check(checks, all, "howell-membership" + tag, howell_ok);

    bool rank1_ok = true;
    for (int n = 0; n <= 2; ++n) {
      BKSpec spec = rank1_spec(p, n, 8, 32);
      BKModule bk = instantiate(spec);
      GradedReport rep = graded(hodge_fil(bk, nygaard(bk, n + 3)));
      for (int i = 0; i < rep.i_max; ++i) {
        rank1_ok = rank1_ok && rep.gr[i].torsion.empty();
        rank1_ok = rank1_ok && rep.gr[i].free_rank == (i == n ? 1 : 0);
      }
    }
    push_check(checks, all, "rank1-exactness" + tag, rank1_ok);

    {
      BKSpec spec = tate_spec(p, 8, 32);
      BKModule bk = instantiate(spec);
      GradedReport rep = graded(hodge_fil(bk, nygaard(bk, 4)));
      HTWeights ht = ht_weights(rep);
      bool tate_ok = ht.weights.size() == 1 && ht.weights[0] == std::make_pair(1, 1);
      tate_ok = tate_ok && check_theorem(rep, ht, bk.ctx, true).pass;
      push_check(checks, all, "tate-pipeline" + tag, tate_ok);
    }

    bool ftm_ok = true;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      FilteredThetaModule m = random_ftm(p, 8, s);
      ftm_ok = ftm_ok && validate_ftm(m).empty() && check_prop(m).pass;
    }
    push_check(checks, all, "theta-axioms" + tag, ftm_ok);

    bool weyl_ok = true;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      GradedWeylModule w = random_weyl(p, 8, s);
      weyl_ok = weyl_ok && check_weyl(w).empty() && unrees(rees(w)) == w;
    }
    push_check(checks, all, "weyl-roundtrip" + tag, weyl_ok);

    {
      ConnectionMatrix conn = solve_connection(tate_spec(p));
      push_check(checks, all, "connection-tate" + tag,
                 verify_horizontality(tate_spec(p), conn).zero);
    }
  }
  pass = all;
  json out;
  out["checks"] = std::move(checks);
  out["verdict"] = pass ? "PASS" : "FAIL";
  return out;
}

int error_exit_class(const std::string& kind) {
  if (kind == "SchemaError" || kind == "UsageError") return 2;
  if (kind == "PrecisionError" || kind == "UncertifiedPrecision") return 3;
  return 1;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
  for (const auto& row : rows)
    for (std::size_t j = 0; j < row.size() && j < width.size(); ++j)
      width[j] = std::max(width[j], row[j].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    os << " ";
    for (std::size_t j = 0; j < cells.size(); ++j) {
      os << " " << cells[j] << std::string(width[j] - cells[j].size(), ' ');
      if (j + 1 < cells.size()) os << " |";
    }
    os << "\n";
  };
  line(header);
  for (const auto& row : rows) line(row);
  return os.str();
}

std::string divisors_text(const json& torsion) {
  if (torsion.empty()) return "-";
  std::string out;
  for (const auto& e : torsion) {
    if (!out.empty()) out += " ";
    out += "p^" + std::to_string(e.get<int>());
  }
  return out;
}

std::string profile_rows_text(const json& profiles) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& pr : profiles)
    rows.push_back({std::to_string(pr["i"].get<int>()), divisors_text(pr["torsion"]),
                    std::to_string(pr["free_rank"].get<int>())});
  return render_table({"i", "divisors", "free_rank"}, rows);
}

std::string render_text(const json& report) {
  std::ostringstream os;
  os << report["tool"]["name"].get<std::string>() << " "
     << report["tool"]["version"].get<std::string>() << "\n";
  os << "input " << report["input_hash"].get<std::string>() << "\n";
  const json& inst = report["instance"];
  os << "instance p=" << inst["p"] << " N=" << inst["N"] << " M=" << inst["M"];
  for (const char* key : {"bk", "theta_module", "weyl"})
    if (inst.contains(key)) os << " payload=" << key;
  if (inst.contains("bk") && inst["bk"].contains("name"))
    os << " name=" << inst["bk"]["name"].get<std::string>();
  os << "\n";
  os << "verdict " << report["verdict"].get<std::string>() << "\n";

  const json& results = report["results"];
  for (auto it = results.begin(); it != results.end(); ++it) {
    const std::string& cmd = it.key();
    const json& r = it.value();
    os << "\n[" << cmd << "]\n";
    if (cmd == "nygaard") {
      std::vector<std::vector<std::string>> rows;
      for (const auto& lv : r["levels"])
        rows.push_back({std::to_string(lv["i"].get<int>()),
                        std::to_string(lv["ambient"].get<int>()),
                        std::to_string(lv["gens"].get<int>()),
                        std::to_string(lv["log_size"].get<int>())});
      os << render_table({"i", "ambient", "gens", "log_size"}, rows);
    } else if (cmd == "graded") {
      os << profile_rows_text(r["gr"]);
    } else if (cmd == "ht") {
      os << "  weights";
      if (r["weights"].empty()) os << " -";
      for (const auto& w : r["weights"])
        os << " " << w[0].get<int>() << ":" << w[1].get<int>();
      os << "\n  total " << r["total"].get<int>() << "\n";
    } else if (cmd == "check-theorem") {
      os << "  verdict " << r["verdict"].get<std::string>() << "\n";
      os << "  crystalline_assumed " << (r["crystalline_assumed"].get<bool>() ? "true" : "false")
         << "\n  offending";
      if (r["offending"].empty()) os << " -";
      for (const auto& i : r["offending"]) os << " " << i.get<int>();
      os << "\n";
    } else if (cmd == "connection") {
      os << "  verdict " << r["verdict"].get<std::string>() << "\n";
      os << "  iterations " << r["iterations"].get<int>() << "\n";
      const json& hz = r["horizontality"];
      os << "  horizontality zero=" << (hz["zero"].get<bool>() ? "true" : "false")
         << " certified_val=" << hz["certified_val"].get<int>()
         << " certified_uorder=" << hz["certified_uorder"].get<int>() << "\n";
      std::vector<std::vector<std::string>> rows;
      for (const auto& g : r["griffiths"])
        rows.push_back({std::to_string(g["layer"].get<int>()),
                        g["ok"].get<bool>() ? "true" : "false",
                        std::to_string(g["max_denominator"].get<int>()),
                        std::to_string(g["certified_val"].get<int>())});
      os << render_table({"layer", "ok", "max_denominator", "certified_val"}, rows);
    } else if (cmd == "conj-theta") {
      os << "  verdict " << r["verdict"].get<std::string>() << "\n";
      os << "  violations " << r["violations"].size() << "\n";
      os << profile_rows_text(r["profiles"]);
    } else if (cmd == "check-prop") {
      os << "  verdict " << r["verdict"].get<std::string>() << "\n  ht";
      if (r["ht"].empty()) os << " -";
      for (const auto& w : r["ht"]) os << " " << w[0].get<int>() << ":" << w[1].get<int>();
      os << "\n  offending";
      if (r["offending"].empty()) os << " -";
      for (const auto& i : r["offending"]) os << " " << i.get<int>();
      os << "\n";
    } else if (cmd == "split") {
      std::vector<std::vector<std::string>> rows;
      for (const auto& lv : r["layers"])
        rows.push_back({std::to_string(lv["index"].get<int>()),
                        lv["ok"].get<bool>() ? "true" : "false",
                        lv.contains("blocking_layer")
                            ? std::to_string(lv["blocking_layer"].get<int>())
                            : "-"});
      os << render_table({"index", "ok", "blocking_layer"}, rows);
      os << "  summands";
      if (r["summands"].empty()) os << " -";
      for (const auto& s : r["summands"])
        os << " " << s["index"].get<int>() << ":" << s["rank"].get<int>();
      os << "\n  skipped";
      if (r["skipped"].empty()) os << " -";
      for (const auto& i : r["skipped"]) os << " " << i.get<int>();
      os << "\n";
    } else if (cmd == "rees") {
      std::vector<std::vector<std::string>> rows;
      for (const auto& lv : r["layers"])
        rows.push_back(
            {std::to_string(lv["i"].get<int>()), std::to_string(lv["rank"].get<int>())});
      os << render_table({"i", "rank"}, rows);
      os << "  round_trip " << (r["round_trip"].get<bool>() ? "true" : "false") << "\n";
    } else if (cmd == "sen") {
      os << "  rank " << r["rank"].get<int>() << "\n";
      os << "  top_index " << r["top_index"].get<int>() << "\n";
      os << "  nilpotent " << (r["nilpotent"].get<bool>() ? "true" : "false") << "\n";
      const json& th = r["theta"];
      for (std::size_t i = 0; i < th.size(); ++i) {
        os << "  theta[" << i << "]";
        for (const auto& v : th[i]) os << " " << v.get<std::string>();
        os << "\n";
      }
    } else if (cmd == "selftest") {
      std::vector<std::vector<std::string>> rows;
      for (const auto& c : r["checks"])
        rows.push_back({c["name"].get<std::string>(), c["pass"].get<bool>() ? "PASS" : "FAIL"});
      os << render_table({"check", "status"}, rows);
    } else if (cmd == "escalation") {
      os << "  verdict " << r["verdict"].get<std::string>() << "\n";
      os << "  n_low " << r["n_low"].get<int>() << " n_high " << r["n_high"].get<int>()
         << " stable " << (r["stable"].get<bool>() ? "true" : "false") << "\n";
      os << profile_rows_text(r["high_gr"]);
    } else {
      os << r.dump(2) << "\n";
    }
  }

  const json& errors = report["errors"];
  if (!errors.empty()) {
    os << "\n[errors]\n";
    for (auto it = errors.begin(); it != errors.end(); ++it)
      os << "  " << it.key() << " " << it.value()["kind"].get<std::string>() << ": "
         << it.value()["what"].get<std::string>() << "\n";
  }
  return os.str();
}

}  // namespace

RunOutcome run_doc(const InstanceDoc& doc, const std::string& input_hash, const RunOptions& opt) {
  Pipeline pl;
  pl.doc = doc;
  if (opt.precision) {
    pl.doc.N = opt.precision->first;
    pl.doc.M = opt.precision->second;
  }
  if (opt.seed) pl.doc.seed = *opt.seed;
  if (opt.i_max) pl.doc.i_max = *opt.i_max;
  if (!opt.commands.empty()) pl.doc.commands = opt.commands;
  if (pl.doc.bk) {
    pl.doc.bk->p = pl.doc.p;
    pl.doc.bk->N = pl.doc.N;
    pl.doc.bk->M = pl.doc.M;
  }
  if (pl.doc.commands.empty() && !opt.escalate)
    throw Error(ErrorKind::usage, "no commands requested");

  std::set<std::string> requested(pl.doc.commands.begin(), pl.doc.commands.end());
  for (const auto& c : requested)
    if (std::find(canonical_order().begin(), canonical_order().end(), c) ==
        canonical_order().end())
      throw Error(ErrorKind::usage, "unknown command '" + c + "'");

  json results = json::object();
  json errors = json::object();
  bool verdicts_pass = true;

  auto run_cmd = [&](const std::string& name, auto&& body) {
    try {
      results[name] = body();
    } catch (const Error& e) {
      errors[name] = json{{"kind", error_kind_name(e.kind)}, {"what", e.what()}};
    }
  };

  for (const auto& cmd : canonical_order()) {
    if (!requested.count(cmd)) continue;
    if (cmd == "selftest")
      run_cmd(cmd, [&] {
        bool pass = true;
        json r = cmd_selftest(pass);
        verdicts_pass = verdicts_pass && pass;
        return r;
      });
    else if (cmd == "nygaard")
      run_cmd(cmd, [&] { return cmd_nygaard(pl); });
    else if (cmd == "graded")
      run_cmd(cmd, [&] { return cmd_graded(pl); });
    else if (cmd == "ht")
      run_cmd(cmd, [&] { return cmd_ht(pl); });
    else if (cmd == "check-theorem")
      run_cmd(cmd, [&] {
        bool pass = true;
        json r = cmd_check_theorem(pl, pass);
        verdicts_pass = verdicts_pass && pass;
        return r;
      });
    else if (cmd == "connection")
      run_cmd(cmd, [&] {
        bool pass = true;
        json r = cmd_connection(pl, pass);
        verdicts_pass = verdicts_pass && pass;
        return r;
      });
    else if (cmd == "conj-theta")
      run_cmd(cmd, [&] {
        bool pass = true;
        json r = cmd_conj_theta(pl, pass);
        verdicts_pass = verdicts_pass && pass;
        return r;
      });
    else if (cmd == "check-prop")
      run_cmd(cmd, [&] {
        bool pass = true;
        json r = cmd_check_prop(pl, pass);
        verdicts_pass = verdicts_pass && pass;
        return r;
      });
    else if (cmd == "split")
      run_cmd(cmd, [&] { return cmd_split(pl); });
    else if (cmd == "rees")
      run_cmd(cmd, [&] {
        bool pass = true;
        json r = cmd_rees(pl, pass);
        verdicts_pass = verdicts_pass && pass;
        return r;
      });
    else if (cmd == "sen")
      run_cmd(cmd, [&] { return cmd_sen(pl); });
  }
  if (opt.escalate)
    run_cmd("escalation", [&] {
      bool pass = true;
      json r = cmd_escalate(pl, *opt.escalate, pass);
      verdicts_pass = verdicts_pass && pass;
      return r;
    });

  int exit_code = 0;
  for (auto it = errors.begin(); it != errors.end(); ++it) {
    int cls = error_exit_class(it.value()["kind"].get<std::string>());
    if (cls == 2) {
      exit_code = 2;
      break;
    }
    if (cls == 3)
      exit_code = 3;
    else if (exit_code == 0)
      exit_code = 1;
  }
  if (exit_code == 0 && !verdicts_pass) exit_code = 1;

  json report;
  report["tool"] = json{{"name", kToolName}, {"version", kToolVersion}};
  report["input_hash"] = input_hash;
  report["instance"] = doc_echo(pl.doc);
  report["results"] = std::move(results);
  report["errors"] = std::move(errors);
  report["verdict"] = exit_code == 0 ? "PASS" : "FAIL";
  report["exit_code"] = exit_code;

  RunOutcome out;
  out.report = std::move(report);
  out.exit_code = exit_code;
  return out;
}

std::string emit_report(const nlohmann::json& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  if (format == "text") return render_text(report);
  throw Error(ErrorKind::usage, "unknown format '" + format + "' (expected json or text)");
}

}  // namespace nkit
