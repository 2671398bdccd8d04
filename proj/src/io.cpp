#include "nkit/io.hpp"

#include <charconv>
#include <set>
#include <string>

#include "nkit/corpus.hpp"

namespace nkit {
namespace {

using nlohmann::json;

const std::set<std::string>& known_commands() {
  static const std::set<std::string> cmds = {
      "nygaard", "graded",     "ht",   "check-theorem", "conj-theta", "split",
      "check-prop", "rees", "sen",  "connection",    "selftest"};
  return cmds;
}

struct SchemaErrors {
  std::vector<std::string> lines;

  void add(const std::string& ptr, const std::string& what) { lines.push_back(ptr + ": " + what); }
  bool empty() const { return lines.empty(); }
  [[noreturn]] void raise() const {
    std::string msg;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (i) msg += '\n';
      msg += lines[i];
    }
    throw Error(ErrorKind::schema, msg);
  }
};

bool is_odd_prime(std::uint64_t p) {
  if (p < 3 || p % 2 == 0) return false;
  for (std::uint64_t d = 3; d * d <= p; d += 2)
    if (p % d == 0) return false;
  return true;
}

bool word_budget_ok(std::uint64_t p, int n) {
  std::uint64_t pn = 1;
  const std::uint64_t cap = (1ull << 62);
  for (int i = 0; i < n; ++i) {
    if (pn > cap / p) return false;
    pn *= p;
  }
  return true;
}

void check_keys(SchemaErrors& errs, const json& obj, const std::string& ptr,
                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) errs.add(ptr + "/" + it.key(), "unknown field");
}

bool get_i64(SchemaErrors& errs, const json& v, const std::string& ptr, std::int64_t& out) {
  if (v.is_number_integer()) {
    out = v.get<std::int64_t>();
    return true;
  }
  if (v.is_string()) {
    const std::string& s = v.get_ref<const std::string&>();
    const char* b = s.data();
    const char* e = b + s.size();
    auto r = std::from_chars(b, e, out);
    if (r.ec == std::errc() && r.ptr == e && !s.empty()) return true;
    errs.add(ptr, "not a decimal integer");
    return false;
  }
  errs.add(ptr, "expected an integer or a decimal-integer string");
  return false;
}

bool get_small_int(SchemaErrors& errs, const json& v, const std::string& ptr, int lo, int hi,
                   int& out) {
  std::int64_t x = 0;
  if (!get_i64(errs, v, ptr, x)) return false;
  if (x < lo || x > hi) {
    errs.add(ptr, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return false;
  }
  out = static_cast<int>(x);
  return true;
}

// rows x cols matrix of integers; cols < 0 means any consistent width.
bool get_int_matrix(SchemaErrors& errs, const json& v, const std::string& ptr, int cols,
                    std::vector<std::vector<std::int64_t>>& out) {
  if (!v.is_array()) {
    errs.add(ptr, "expected an array of rows");
    return false;
  }
  bool ok = true;
  out.clear();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& row = v[i];
    std::string rptr = ptr + "/" + std::to_string(i);
    if (!row.is_array()) {
      errs.add(rptr, "expected an array");
      ok = false;
      continue;
    }
    if (cols >= 0 && static_cast<int>(row.size()) != cols) {
      errs.add(rptr, "expected " + std::to_string(cols) + " entries");
      ok = false;
      continue;
    }
    if (cols < 0 && !out.empty() && row.size() != out.front().size()) {
      errs.add(rptr, "ragged row");
      ok = false;
      continue;
    }
    std::vector<std::int64_t> vals(row.size(), 0);
    for (std::size_t j = 0; j < row.size(); ++j)
      ok &= get_i64(errs, row[j], rptr + "/" + std::to_string(j), vals[j]);
    out.push_back(std::move(vals));
  }
  return ok;
}

void parse_bk(SchemaErrors& errs, const json& v, InstanceDoc& doc) {
  if (!v.is_object()) {
    errs.add("/bk", "expected an object");
    return;
  }
  check_keys(errs, v, "/bk", {"name", "height", "assume_crystalline", "frob"});
  BKSpec spec;
  spec.p = doc.p;
  spec.N = doc.N;
  spec.M = doc.M;
  if (v.contains("name")) {
    if (v["name"].is_string())
      spec.name = v["name"].get<std::string>();
    else
      errs.add("/bk/name", "expected a string");
  }
  if (v.contains("assume_crystalline")) {
    if (v["assume_crystalline"].is_boolean())
      spec.assume_crystalline = v["assume_crystalline"].get<bool>();
    else
      errs.add("/bk/assume_crystalline", "expected a boolean");
  }
  if (!v.contains("height"))
    errs.add("/bk/height", "missing required field");
  else
    get_small_int(errs, v["height"], "/bk/height", 0, 1 << 20, spec.height);
  if (!v.contains("frob")) {
    errs.add("/bk/frob", "missing required field");
    return;
  }
  const json& fr = v["frob"];
  if (!fr.is_array() || fr.empty()) {
    errs.add("/bk/frob", "expected a nonempty square matrix of coefficient lists");
    return;
  }
  int r = static_cast<int>(fr.size());
  spec.rank = r;
  spec.frob.assign(r, std::vector<IntPoly>(r));
  for (int i = 0; i < r; ++i) {
    std::string iptr = "/bk/frob/" + std::to_string(i);
    if (!fr[i].is_array() || static_cast<int>(fr[i].size()) != r) {
      errs.add(iptr, "expected " + std::to_string(r) + " entries");
      continue;
    }
    for (int j = 0; j < r; ++j) {
      std::string eptr = iptr + "/" + std::to_string(j);
      const json& cell = fr[i][j];
      if (!cell.is_array()) {
        errs.add(eptr, "expected a coefficient list (lowest degree first)");
        continue;
      }
      if (static_cast<int>(cell.size()) > doc.M) {
        errs.add(eptr, "degree exceeds the series window M");
        continue;
      }
      IntPoly poly(cell.size(), 0);
      for (std::size_t k = 0; k < cell.size(); ++k)
        get_i64(errs, cell[k], eptr + "/" + std::to_string(k), poly[k]);
      spec.frob[i][j] = std::move(poly);
    }
  }
  doc.bk = std::move(spec);
}

void parse_ftm(SchemaErrors& errs, const json& v, InstanceDoc& doc) {
  if (!v.is_object()) {
    errs.add("/theta_module", "expected an object");
    return;
  }
  check_keys(errs, v, "/theta_module", {"layers"});
  if (!v.contains("layers") || !v["layers"].is_array() || v["layers"].empty()) {
    errs.add("/theta_module/layers", "expected a nonempty array of layers");
    return;
  }
  FTMDoc out;
  const json& layers = v["layers"];
  int prev_rank = 0;
  for (std::size_t t = 0; t < layers.size(); ++t) {
    std::string lptr = "/theta_module/layers/" + std::to_string(t);
    const json& lay = layers[t];
    if (!lay.is_object()) {
      errs.add(lptr, "expected an object");
      return;
    }
    check_keys(errs, lay, lptr, {"index", "inclusion", "theta"});
    FTMDoc::Layer parsed;
    if (!lay.contains("index"))
      errs.add(lptr + "/index", "missing required field");
    else if (!get_small_int(errs, lay["index"], lptr + "/index", -(1 << 20), 1 << 20,
                            parsed.index))
      return;
    if (t > 0 && parsed.index != out.layers[t - 1].index + 1)
      errs.add(lptr + "/index", "layer indices must be consecutive and ascending");
    if (!lay.contains("theta")) {
      errs.add(lptr + "/theta", "missing required field");
      return;
    }
    if (!get_int_matrix(errs, lay["theta"], lptr + "/theta", -1, parsed.theta)) return;
    int rank = static_cast<int>(parsed.theta.size());
    for (std::size_t i = 0; i < parsed.theta.size(); ++i)
      if (static_cast<int>(parsed.theta[i].size()) != rank) {
        errs.add(lptr + "/theta/" + std::to_string(i), "theta must be square");
        return;
      }
    int want_cols = (t == 0) ? 0 : prev_rank;
    if (lay.contains("inclusion")) {
      if (!get_int_matrix(errs, lay["inclusion"], lptr + "/inclusion", want_cols,
                          parsed.inclusion))
        return;
      if (static_cast<int>(parsed.inclusion.size()) != rank) {
        errs.add(lptr + "/inclusion", "expected " + std::to_string(rank) + " rows");
        return;
      }
    } else {
      if (t > 0 && want_cols > 0) {
        errs.add(lptr + "/inclusion", "missing required field");
        return;
      }
      parsed.inclusion.assign(rank, {});
    }
    prev_rank = rank;
    out.layers.push_back(std::move(parsed));
  }
  doc.ftm = std::move(out);
}

void parse_weyl(SchemaErrors& errs, const json& v, InstanceDoc& doc) {
  if (!v.is_object()) {
    errs.add("/weyl", "expected an object");
    return;
  }
  check_keys(errs, v, "/weyl", {"weights", "coupling", "depth"});
  WeylDoc out;
  if (!v.contains("weights") || !v["weights"].is_array() || v["weights"].empty()) {
    errs.add("/weyl/weights", "expected a nonempty array of generator weights");
    return;
  }
  const json& ws = v["weights"];
  for (std::size_t i = 0; i < ws.size(); ++i) {
    int w = 0;
    if (get_small_int(errs, ws[i], "/weyl/weights/" + std::to_string(i), 0, 1 << 16, w))
      out.weights.push_back(w);
    else
      return;
  }
  int r = static_cast<int>(out.weights.size());
  if (v.contains("coupling")) {
    if (!get_int_matrix(errs, v["coupling"], "/weyl/coupling", r, out.coupling)) return;
    if (static_cast<int>(out.coupling.size()) != r) {
      errs.add("/weyl/coupling", "expected " + std::to_string(r) + " rows");
      return;
    }
  }
  if (v.contains("depth")) {
    if (!get_small_int(errs, v["depth"], "/weyl/depth", 0, 1 << 12, out.depth)) return;
  }
  doc.weyl = std::move(out);
}

json int_matrix_json(const std::vector<std::vector<std::int64_t>>& m) {
  json rows = json::array();
  for (const auto& r : m) {
    json row = json::array();
    for (std::int64_t x : r) row.push_back(std::to_string(x));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

InstanceDoc parse_doc(const std::string& bytes) {
  SchemaErrors errs;
  json root = json::parse(bytes, nullptr, false);
  if (root.is_discarded()) {
    errs.add("/", "not valid JSON");
    errs.raise();
  }
  if (!root.is_object()) {
    errs.add("/", "expected a JSON object");
    errs.raise();
  }
  check_keys(errs, root, "",
             {"p", "N", "M", "commands", "seed", "i_max", "bk", "theta_module", "weyl"});

  InstanceDoc doc;
  if (root.contains("p")) {
    std::int64_t p = 0;
    if (get_i64(errs, root["p"], "/p", p)) {
      if (p < 3 || !is_odd_prime(static_cast<std::uint64_t>(p)))
        errs.add("/p", "must be an odd prime");
      else
        doc.p = static_cast<std::uint64_t>(p);
    }
  }
  if (root.contains("N")) get_small_int(errs, root["N"], "/N", 1, 1 << 10, doc.N);
  if (root.contains("M")) get_small_int(errs, root["M"], "/M", 1, 1 << 12, doc.M);
  if (!word_budget_ok(doc.p, doc.N))
    errs.add("/N", "p^N exceeds the machine word budget");
  if (root.contains("seed")) {
    std::int64_t s = 0;
    if (get_i64(errs, root["seed"], "/seed", s)) {
      if (s < 0)
        errs.add("/seed", "must be nonnegative");
      else
        doc.seed = static_cast<std::uint64_t>(s);
    }
  }
  if (root.contains("i_max")) get_small_int(errs, root["i_max"], "/i_max", 1, 1 << 12, doc.i_max);
  if (root.contains("commands")) {
    const json& cmds = root["commands"];
    if (!cmds.is_array()) {
      errs.add("/commands", "expected an array of command names");
    } else {
      for (std::size_t i = 0; i < cmds.size(); ++i) {
        std::string cptr = "/commands/" + std::to_string(i);
        if (!cmds[i].is_string()) {
          errs.add(cptr, "expected a string");
          continue;
        }
        std::string c = cmds[i].get<std::string>();
        if (!known_commands().count(c))
          errs.add(cptr, "unknown command '" + c + "'");
        else
          doc.commands.push_back(c);
      }
    }
  }

  int payloads = static_cast<int>(root.contains("bk")) +
                 static_cast<int>(root.contains("theta_module")) +
                 static_cast<int>(root.contains("weyl"));
  if (payloads != 1)
    errs.add("/", "expected exactly one payload among bk, theta_module, weyl");
  else if (root.contains("bk"))
    parse_bk(errs, root["bk"], doc);
  else if (root.contains("theta_module"))
    parse_ftm(errs, root["theta_module"], doc);
  else
    parse_weyl(errs, root["weyl"], doc);

  if (!errs.empty()) errs.raise();
  return doc;
}

nlohmann::json doc_echo(const InstanceDoc& doc) {
  json out;
  out["p"] = doc.p;
  out["N"] = doc.N;
  out["M"] = doc.M;
  out["seed"] = doc.seed;
  out["commands"] = doc.commands;
  if (doc.i_max >= 0) out["i_max"] = doc.i_max;
  if (doc.bk) {
    json bk;
    if (!doc.bk->name.empty()) bk["name"] = doc.bk->name;
    bk["height"] = doc.bk->height;
    bk["assume_crystalline"] = doc.bk->assume_crystalline;
    json fr = json::array();
    for (const auto& row : doc.bk->frob) {
      json jrow = json::array();
      for (const auto& poly : row) {
        json cell = json::array();
        for (std::int64_t c : poly) cell.push_back(std::to_string(c));
        jrow.push_back(std::move(cell));
      }
      fr.push_back(std::move(jrow));
    }
    bk["frob"] = std::move(fr);
    out["bk"] = std::move(bk);
  }
  if (doc.ftm) {
    json layers = json::array();
    for (const auto& lay : doc.ftm->layers) {
      json jl;
      jl["index"] = lay.index;
      jl["inclusion"] = int_matrix_json(lay.inclusion);
      jl["theta"] = int_matrix_json(lay.theta);
      layers.push_back(std::move(jl));
    }
    out["theta_module"] = json{{"layers", std::move(layers)}};
  }
  if (doc.weyl) {
    json w;
    w["weights"] = doc.weyl->weights;
    if (!doc.weyl->coupling.empty()) w["coupling"] = int_matrix_json(doc.weyl->coupling);
    w["depth"] = doc.weyl->depth;
    out["weyl"] = std::move(w);
  }
  return out;
}

bool doc_equal(const InstanceDoc& a, const InstanceDoc& b) { return doc_echo(a) == doc_echo(b); }

FilteredThetaModule build_ftm(const InstanceDoc& doc) {
  if (!doc.ftm) throw Error(ErrorKind::usage, "document carries no theta_module payload");
  FilteredThetaModule m;
  m.ctx = PrecisionCtx::make(doc.p, doc.N, doc.M);
  for (const auto& lay : doc.ftm->layers) {
    FTMLayer out;
    out.index = lay.index;
    int rank = static_cast<int>(lay.theta.size());
    int prev = m.layers.empty() ? 0 : m.layers.back().rank();
    out.theta = rank ? ZMatrix::from_rows(m.ctx, lay.theta) : ZMatrix(m.ctx, 0, 0);
    bool incl_empty = true;
    for (const auto& r : lay.inclusion) incl_empty = incl_empty && r.empty();
    out.inclusion = incl_empty ? ZMatrix(m.ctx, rank, m.layers.empty() ? 0 : prev)
                               : ZMatrix::from_rows(m.ctx, lay.inclusion);
    m.layers.push_back(std::move(out));
  }
  return m;
}

GradedWeylModule build_weyl(const InstanceDoc& doc) {
  if (!doc.weyl) throw Error(ErrorKind::usage, "document carries no weyl payload");
  return weyl_module(doc.p, doc.N, doc.weyl->weights, doc.weyl->coupling, doc.weyl->depth);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* hexd = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hexd[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace nkit
