#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cogniprof/error.hpp"
#include "cogniprof/harness.hpp"

namespace cogniprof::harness {
namespace {

using nlohmann::json;

std::uint64_t checksum(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

json config_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["test_fraction"] = c.test_fraction;
  j["tuning_folds"] = c.tuning_folds;
  j["use_phrases"] = c.use_phrases;
  j["segment_epsilon"] = c.segment_epsilon;
  j["max_phrase_length"] = c.max_phrase_length;
  j["phrase_top_k"] = c.phrase_top_k;
  j["popularity_cap"] = c.popularity_cap;
  j["tfidf_dims"] = c.tfidf_dims;
  j["svm_c"] = c.svm_c;
  j["eta"] = c.eta ? json(*c.eta) : json(nullptr);
  j["inverse_variance"] = c.inverse_variance;
  j["boost"] = {{"rounds", c.boost.rounds},
                {"learning_rate", c.boost.learning_rate},
                {"max_depth", c.boost.max_depth},
                {"min_leaf", c.boost.min_leaf},
                {"fixed_root", c.boost.fixed_root}};
  j["grid_step"] = c.grid_step;
  j["coherence"] = c.coherence ? json{{"alpha", c.coherence->alpha}, {"beta", c.coherence->beta}} : json(nullptr);
  j["delta"] = c.delta;
  j["candidate_k"] = c.candidate_k;
  j["coverage_recall"] = c.coverage_recall;
  j["abstain_floor"] = c.abstain_floor ? json(*c.abstain_floor) : json(nullptr);
  return j;
}

PipelineConfig config_from(const json& j) {
  PipelineConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.test_fraction = j.at("test_fraction").get<double>();
  c.tuning_folds = j.at("tuning_folds").get<std::size_t>();
  c.use_phrases = j.at("use_phrases").get<bool>();
  c.segment_epsilon = j.at("segment_epsilon").get<double>();
  c.max_phrase_length = j.at("max_phrase_length").get<std::size_t>();
  c.phrase_top_k = j.at("phrase_top_k").get<std::size_t>();
  c.popularity_cap = j.at("popularity_cap").get<double>();
  c.tfidf_dims = j.at("tfidf_dims").get<std::size_t>();
  c.svm_c = j.at("svm_c").get<double>();
  if (!j.at("eta").is_null()) c.eta = j.at("eta").get<double>();
  c.inverse_variance = j.at("inverse_variance").get<bool>();
  const auto& b = j.at("boost");
  c.boost.rounds = b.at("rounds").get<std::size_t>();
  c.boost.learning_rate = b.at("learning_rate").get<double>();
  c.boost.max_depth = b.at("max_depth").get<std::size_t>();
  c.boost.min_leaf = b.at("min_leaf").get<std::size_t>();
  c.boost.fixed_root = b.at("fixed_root").get<bool>();
  c.grid_step = j.at("grid_step").get<double>();
  if (!j.at("coherence").is_null()) {
    c.coherence = coherence::CoherenceParams{j["coherence"].at("alpha").get<double>(),
                                             j["coherence"].at("beta").get<double>()};
  }
  c.delta = j.at("delta").get<std::size_t>();
  c.candidate_k = j.at("candidate_k").get<std::size_t>();
  c.coverage_recall = j.at("coverage_recall").get<bool>();
  if (!j.at("abstain_floor").is_null()) c.abstain_floor = j.at("abstain_floor").get<double>();
  return c;
}

json tree_json(const boost::Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({n.leaf, n.threshold, n.left, n.right, n.value, n.mean_abs_gradient, n.count});
  }
  return nodes;
}

boost::Tree tree_from(const json& j) {
  boost::Tree t;
  for (const auto& n : j) {
    boost::TreeNode node;
    node.leaf = n.at(0).get<bool>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<std::size_t>();
    node.right = n.at(3).get<std::size_t>();
    node.value = n.at(4).get<double>();
    node.mean_abs_gradient = n.at(5).get<double>();
    node.count = n.at(6).get<std::size_t>();
    if (!node.leaf && (node.left >= j.size() || node.right >= j.size())) {
      fail(ErrorCode::parse, "tree node child out of range");
    }
    t.nodes.push_back(node);
  }
  if (t.nodes.empty()) fail(ErrorCode::parse, "empty boosted tree");
  return t;
}

json rwtree_json(const rwtree::RwTree& tree) {
  json j;
  const auto& o = tree.options();
  j["options"] = {{"delta", o.delta},
                  {"fanout", o.fanout},
                  {"tau", o.tau ? json(*o.tau) : json(nullptr)},
                  {"query_updates", o.query_updates}};
  json entries = json::array();
  for (const auto& e : tree.entries()) {
    json pts = json::array();
    for (const auto& p : e.points) pts.push_back({{"coords", p.coords}, {"author", p.author_id ? json(*p.author_id) : json(nullptr)}});
    entries.push_back({{"name", e.name},
                       {"weight", e.weight},
                       {"parent", e.parent ? json(*e.parent) : json(nullptr)},
                       {"points", pts}});
  }
  j["entries"] = entries;
  return j;
}

rwtree::OccupationNode node_from(const std::string& name, const std::map<std::string, const json*>& by_name,
                                 const std::map<std::string, std::vector<std::string>>& kids, int depth) {
  if (depth > 64) fail(ErrorCode::parse, "occupation hierarchy too deep");
  const json& e = *by_name.at(name);
  rwtree::OccupationNode n;
  n.name = name;
  n.weight = e.at("weight").get<double>();
  for (const auto& p : e.at("points")) {
    rwtree::OrientPoint op;
    op.coords = p.at("coords").get<rwtree::Point>();
    if (!p.at("author").is_null()) op.author_id = p.at("author").get<std::string>();
    n.orients.push_back(std::move(op));
  }
  if (const auto it = kids.find(name); it != kids.end()) {
    for (const auto& k : it->second) n.children.push_back(node_from(k, by_name, kids, depth + 1));
  }
  return n;
}

rwtree::RwTree rwtree_from(const json& j) {
  rwtree::RwTreeOptions o;
  const auto& jo = j.at("options");
  o.delta = jo.at("delta").get<std::size_t>();
  o.fanout = jo.at("fanout").get<std::size_t>();
  if (!jo.at("tau").is_null()) o.tau = jo.at("tau").get<double>();
  o.query_updates = jo.at("query_updates").get<bool>();
  rwtree::RwTree tree(o);
  std::map<std::string, const json*> by_name;
  std::map<std::string, std::vector<std::string>> kids;
  std::vector<std::string> roots;
  for (const auto& e : j.at("entries")) {
    const auto name = e.at("name").get<std::string>();
    by_name[name] = &e;
    if (e.at("parent").is_null()) roots.push_back(name);
    else kids[e["parent"].get<std::string>()].push_back(name);
  }
  for (const auto& r : roots) {
    const auto node = node_from(r, by_name, kids, 0);
    tree.insert(node);
  }
  return tree;
}

json bundle_json(const ModelBundle& m) {
  json j;
  j["format_version"] = m.format_version;
  j["run_id"] = m.run_id;
  j["config"] = config_json(m.config);
  j["occupations"] = m.occupations;

  json lex = json::array();
  for (const auto& l : m.lexicons.lexicons()) lex.push_back(l.to_tsv());
  j["lexicons"] = {{"hash", m.lexicons.hash()}, {"tables", lex}};
  json slang = json::array();
  for (const auto& [k, v] : m.slang.entries()) slang.push_back({k, v});
  j["slang"] = slang;
  std::vector<std::string> vocab(m.vocabulary.begin(), m.vocabulary.end());
  std::sort(vocab.begin(), vocab.end());
  j["vocabulary"] = vocab;
  j["stopwords"] = m.stopwords.sorted();
  j["stats"] = {{"units", m.stats.units}, {"counts", m.stats.counts}};

  json rows = json::object();
  for (const auto& [f, t] : m.matrix.rows) rows[f] = t;
  j["matrix"] = {{"run", m.run_id},
                 {"provenance", m.matrix.provenance == lessn::MatrixProvenance::trained ? "trained" : "bundled"},
                 {"rows", rows}};
  j["phrases"] = m.phrases;
  json df = json::object();
  for (const auto& [t, n] : m.tfidf.df) df[t] = n;
  j["tfidf"] = {{"dims", m.tfidf.dims}, {"documents", m.tfidf.documents}, {"df", df}};

  const auto& s = m.svm;
  j["svm"] = {{"run", m.run_id},
              {"eta", s.params.eta},
              {"scale", s.params.scale},
              {"C", s.params.C},
              {"classes", s.classes},
              {"vectors", s.vectors},
              {"coef", s.coef},
              {"bias", s.bias},
              {"norm_sq", s.norm_sq}};

  json ens = json::array();
  for (const auto& per_q : m.boost.ensembles) {
    json row = json::array();
    for (const auto& e : per_q) {
      json trees = json::array();
      for (const auto& t : e.trees) trees.push_back(tree_json(t));
      row.push_back({{"init", e.init}, {"learning_rate", e.learning_rate}, {"trees", trees}});
    }
    ens.push_back(row);
  }
  j["boost"] = {{"run", m.run_id}, {"classes", m.boost.classes}, {"ensembles", ens}};

  json fits = json::array();
  for (const auto& per_q : m.curve.fits) {
    json row = json::array();
    for (const auto& f : per_q) {
      row.push_back({{"x", f.breakpoints}, {"y", f.values}, {"variance", f.residual_variance}});
    }
    fits.push_back(row);
  }
  j["curve"] = {{"run", m.run_id},
                {"classes", m.curve.classes},
                {"fits", fits},
                {"signs", m.curve.signs},
                {"weights", m.curve.weights}};

  json surface = json::array();
  for (const auto& c : m.tuning.surface) surface.push_back({c.alpha, c.beta, c.f1});
  j["coherence"] = {{"run", m.run_id},
                    {"alpha", m.coherence.alpha},
                    {"beta", m.coherence.beta},
                    {"best_f1", m.tuning.best_f1},
                    {"surface", surface}};
  j["rwtree"] = rwtree_json(m.tree);
  j["rwtree"]["run"] = m.run_id;
  j["train_ids"] = m.train_ids;
  j["test_ids"] = m.test_ids;
  return j;
}

ModelBundle bundle_from(const json& j) {
  ModelBundle m;
  m.format_version = j.at("format_version").get<int>();
  m.run_id = j.at("run_id").get<std::string>();
  for (auto part : {"matrix", "svm", "boost", "curve", "coherence", "rwtree"}) {
    if (j.at(part).at("run").get<std::string>() != m.run_id) {
      fail(ErrorCode::validation, std::string("model component '") + part + "' comes from another training run");
    }
  }
  m.config = config_from(j.at("config"));
  m.occupations = j.at("occupations").get<std::vector<std::string>>();

  std::vector<lessn::Lexicon> lex;
  for (const auto& t : j.at("lexicons").at("tables")) {
    std::istringstream in(t.get<std::string>());
    lex.push_back(lessn::Lexicon::parse(in, std::nullopt, "<bundle lexicon>"));
  }
  m.lexicons = lessn::LexiconSet(std::move(lex));
  if (m.lexicons.hash() != j["lexicons"].at("hash").get<std::uint64_t>()) {
    fail(ErrorCode::checksum, "lexicon hash mismatch in model bundle");
  }
  for (const auto& e : j.at("slang")) m.slang.add(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  for (const auto& w : j.at("vocabulary")) m.vocabulary.insert(w.get<std::string>());
  {
    std::unordered_set<std::string> sw;
    for (const auto& w : j.at("stopwords")) sw.insert(w.get<std::string>());
    m.stopwords = corpus::StopWords(std::move(sw));
  }
  m.stats.units = j.at("stats").at("units").get<double>();
  m.stats.counts = j["stats"].at("counts").get<std::map<std::string, double>>();

  const auto& mx = j.at("matrix");
  m.matrix.provenance =
      mx.at("provenance").get<std::string>() == "trained" ? lessn::MatrixProvenance::trained : lessn::MatrixProvenance::bundled;
  for (const auto& [f, t] : mx.at("rows").items()) m.matrix.rows[f] = t.get<lessn::TraitScores>();
  m.phrases = j.at("phrases").get<std::vector<std::string>>();
  const auto& tf = j.at("tfidf");
  m.tfidf.dims = tf.at("dims").get<std::size_t>();
  m.tfidf.documents = tf.at("documents").get<std::size_t>();
  for (const auto& [t, n] : tf.at("df").items()) m.tfidf.df[t] = n.get<std::size_t>();

  const auto& s = j.at("svm");
  m.svm.params.eta = s.at("eta").get<double>();
  m.svm.params.scale = s.at("scale").get<std::vector<double>>();
  m.svm.params.C = s.at("C").get<double>();
  m.svm.classes = s.at("classes").get<std::size_t>();
  m.svm.vectors = s.at("vectors").get<std::vector<std::vector<double>>>();
  m.svm.coef = s.at("coef").get<std::vector<std::vector<double>>>();
  m.svm.bias = s.at("bias").get<std::vector<double>>();
  m.svm.norm_sq = s.at("norm_sq").get<std::vector<double>>();

  const auto& b = j.at("boost");
  m.boost.params = m.config.boost;
  m.boost.classes = b.at("classes").get<std::size_t>();
  for (const auto& row : b.at("ensembles")) {
    std::vector<boost::Ensemble> per_q;
    for (const auto& e : row) {
      boost::Ensemble en;
      en.init = e.at("init").get<double>();
      en.learning_rate = e.at("learning_rate").get<double>();
      for (const auto& t : e.at("trees")) en.trees.push_back(tree_from(t));
      per_q.push_back(std::move(en));
    }
    m.boost.ensembles.push_back(std::move(per_q));
  }

  const auto& c = j.at("curve");
  m.curve.classes = c.at("classes").get<std::size_t>();
  for (const auto& row : c.at("fits")) {
    std::vector<icf::IsotonicFit> per_q;
    for (const auto& f : row) {
      icf::IsotonicFit fit;
      fit.breakpoints = f.at("x").get<std::vector<double>>();
      fit.values = f.at("y").get<std::vector<double>>();
      fit.residual_variance = f.at("variance").get<double>();
      per_q.push_back(std::move(fit));
    }
    m.curve.fits.push_back(std::move(per_q));
  }
  m.curve.signs = c.at("signs").get<std::vector<std::vector<int>>>();
  m.curve.weights = c.at("weights").get<std::vector<std::vector<double>>>();

  const auto& co = j.at("coherence");
  m.coherence = {co.at("alpha").get<double>(), co.at("beta").get<double>()};
  m.coherence.validate();
  m.tuning.best = m.coherence;
  m.tuning.best_f1 = co.at("best_f1").get<double>();
  for (const auto& cell : co.at("surface")) {
    m.tuning.surface.push_back({cell.at(0).get<double>(), cell.at(1).get<double>(), cell.at(2).get<double>()});
  }
  m.tree = rwtree_from(j.at("rwtree"));
  m.train_ids = j.at("train_ids").get<std::vector<std::string>>();
  m.test_ids = j.at("test_ids").get<std::vector<std::string>>();

  const std::size_t k = m.occupations.size();
  if (m.svm.classes != k || m.boost.classes != k || m.curve.classes != k) {
    fail(ErrorCode::validation, "model components disagree on the number of occupations");
  }
  return m;
}

}  // namespace

void save_model(const ModelBundle& m, std::ostream& out) {
  if (m.occupations.empty() || !m.curve.trained()) fail(ErrorCode::state, "cannot save an untrained model");
  const std::string payload = bundle_json(m).dump();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(checksum(payload)));
  out << kBundleMagic << " v" << m.format_version << ' ' << payload.size() << ' ' << hex << '\n' << payload;
  if (!out) fail(ErrorCode::io, "failed writing model bundle");
}

void save_model(const ModelBundle& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write model: " + path.string());
  save_model(m, out);
}

ModelBundle load_model(std::istream& in, std::string_view source) {
  const std::string where(source);
  std::string header;
  if (!std::getline(in, header)) fail(ErrorCode::parse, where + ": empty model file");
  std::istringstream hs(header);
  std::string magic, version, hex;
  std::size_t size = 0;
  hs >> magic >> version;
  if (magic != kBundleMagic) fail(ErrorCode::parse, where + ": not a cogniprof model bundle");
  if (version != "v" + std::to_string(kFormatVersion)) {
    fail(ErrorCode::version, where + ": bundle format " + version + " is not supported (expected v" +
                                 std::to_string(kFormatVersion) + ")");
  }
  if (!(hs >> size >> hex) || hex.size() != 16) fail(ErrorCode::parse, where + ": malformed bundle header");
  std::string payload(size, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in.gcount()) != size) {
    fail(ErrorCode::checksum, where + ": truncated bundle (" + std::to_string(in.gcount()) + " of " +
                                  std::to_string(size) + " payload bytes)");
  }
  char expect[17];
  std::snprintf(expect, sizeof expect, "%016llx", static_cast<unsigned long long>(checksum(payload)));
  if (hex != expect) fail(ErrorCode::checksum, where + ": bundle checksum mismatch");
  json j;
  try {
    j = json::parse(payload);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, where + ": " + e.what());
  }
  try {
    auto m = bundle_from(j);
    if (m.format_version != kFormatVersion) fail(ErrorCode::version, where + ": payload version mismatch");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, where + ": malformed bundle payload: " + e.what());
  }
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open model: " + path.string());
  return load_model(in, path.string());
}

// ------------------------------------------------------------------ Reports

void write_report_json(std::ostream& out, const EvalReport& r) {
  json j = {{"variant", r.variant},   {"precision", r.precision}, {"recall", r.recall},
            {"f1", r.f1},             {"correct", r.correct},     {"assigned", r.assigned},
            {"labeled", r.labeled},   {"occupations", r.occupations}, {"confusion", r.confusion},
            {"latency_median_us", r.latency_median_us}, {"latency_p95_us", r.latency_p95_us}};
  out << j.dump() << '\n';
}

void write_reports_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "variant,precision,recall,f1,correct,assigned,labeled,latency_median_us,latency_p95_us\n";
  const auto old = out.precision(10);
  for (const auto& r : reports) {
    out << r.variant << ',' << r.precision << ',' << r.recall << ',' << r.f1 << ',' << r.correct << ','
        << r.assigned << ',' << r.labeled << ',' << r.latency_median_us << ',' << r.latency_p95_us << '\n';
  }
  out.precision(old);
}

void write_surface_csv(std::ostream& out, const coherence::TuneResult& t) {
  out << "alpha,beta,f1\n";
  const auto old = out.precision(10);
  for (const auto& c : t.surface) out << c.alpha << ',' << c.beta << ',' << c.f1 << '\n';
  out.precision(old);
}

void write_predictions_jsonl(std::ostream& out, std::span<const AuthorPrediction> predictions) {
  for (const auto& p : predictions) {
    json j = {{"author_id", p.author_id},
              {"occupation", p.occupation ? json(*p.occupation) : json(nullptr)},
              {"weight", p.weight},
              {"fused", p.fused}};
    if (p.truth) j["truth"] = *p.truth;
    out << j.dump() << '\n';
  }
}

}  // namespace cogniprof::harness
