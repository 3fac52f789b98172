#include "circuitgraph/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>

#include <json.hpp>

#include "circuitgraph/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace circuitgraph {

namespace {

constexpr double kPi = 3.14159265358979323846;

double resonance_lc(double l, double c) { return 1.0 / (2.0 * kPi * std::sqrt(l * c)); }

double series_c(double c1, double c2) { return c1 * c2 / (c1 + c2); }

// ---------------------------------------------------------------------------
// Continuous suite: seven source-driven resonant topologies. Classes 2 and 3
// share the exact same series-RLC skeleton and differ only in the band the
// capacitance is drawn from; the bands overlap on purpose, so telling the two
// apart hinges on component values rather than connectivity and a residual
// confusion between them is expected. The excitation frequency is drawn as a
// log-uniform multiple of each instance's resonance frequency.
// ---------------------------------------------------------------------------

const ParamRange kVolt{1.0, 100.0, true};
const ParamRange kAmp{1.0, 100.0, true};
const ParamRange kRes{1.0, 100.0, true};
const ParamRange kInd{1e-6, 1e-3, true};
const ParamRange kRatio{0.05, 20.0, true};

std::vector<ClassTemplate> make_continuous7() {
    std::vector<ClassTemplate> out;

    auto add = [&out](std::string name, std::string skeleton,
                      std::vector<std::pair<std::string, ParamRange>> params,
                      std::function<double(const ParamMap&)> resonance) {
        ClassTemplate t;
        t.name = std::move(name);
        t.class_id = static_cast<int>(out.size());
        t.mode = CircuitMode::Continuous;
        t.skeleton = std::move(skeleton);
        t.params = std::move(params);
        t.resonance = std::move(resonance);
        out.push_back(std::move(t));
    };

    add("r-parallel-lc",
        "V1 1 0 {V}\n"
        "R1 1 2 {R}\n"
        "L1 2 0 {L}\n"
        "C1 2 0 {C}\n"
        ".freq {F}\n",
        {{"V", kVolt}, {"R", kRes}, {"L", kInd}, {"C", {1e-8, 1e-6, true}}, {"ratio", kRatio}},
        [](const ParamMap& p) { return resonance_lc(p.at("L"), p.at("C")); });

    add("i-shunt-lc",
        "I1 1 0 {I}\n"
        "R1 1 0 {R}\n"
        "L1 1 2 {L}\n"
        "C1 2 0 {C}\n"
        ".freq {F}\n",
        {{"I", kAmp}, {"R", kRes}, {"L", kInd}, {"C", {1e-8, 1e-6, true}}, {"ratio", kRatio}},
        [](const ParamMap& p) { return resonance_lc(p.at("L"), p.at("C")); });

    add("series-rlc-lo",
        "V1 1 0 {V}\n"
        "R1 1 2 {R}\n"
        "L1 2 3 {L}\n"
        "C1 3 0 {C}\n"
        ".freq {F}\n",
        {{"V", kVolt}, {"R", kRes}, {"L", kInd}, {"C", {1e-9, 5e-8, true}}, {"ratio", kRatio}},
        [](const ParamMap& p) { return resonance_lc(p.at("L"), p.at("C")); });

    add("series-rlc-hi",
        "V1 1 0 {V}\n"
        "R1 1 2 {R}\n"
        "L1 2 3 {L}\n"
        "C1 3 0 {C}\n"
        ".freq {F}\n",
        {{"V", kVolt}, {"R", kRes}, {"L", kInd}, {"C", {3e-8, 5e-7, true}}, {"ratio", kRatio}},
        [](const ParamMap& p) { return resonance_lc(p.at("L"), p.at("C")); });

    add("lclc-ladder",
        "V1 1 0 {V}\n"
        "L1 1 2 {L1}\n"
        "C1 2 0 {C1}\n"
        "L2 2 3 {L2}\n"
        "C2 3 0 {C2}\n"
        "R1 3 0 {R}\n"
        ".freq {F}\n",
        {{"V", kVolt},
         {"L1", kInd},
         {"C1", {1e-9, 1e-5, true}},
         {"L2", kInd},
         {"C2", {1e-9, 1e-5, true}},
         {"R", kRes},
         {"ratio", kRatio}},
        [](const ParamMap& p) {
            return resonance_lc(p.at("L1") + p.at("L2"), series_c(p.at("C1"), p.at("C2")));
        });

    add("lcc",
        "V1 1 0 {V}\n"
        "L1 1 2 {L}\n"
        "C1 2 3 {C1}\n"
        "C2 3 0 {C2}\n"
        "R1 3 0 {R}\n"
        ".freq {F}\n",
        {{"V", kVolt},
         {"L", kInd},
         {"C1", {1e-9, 1e-7, true}},
         {"C2", {1e-7, 1e-5, true}},
         {"R", kRes},
         {"ratio", kRatio}},
        [](const ParamMap& p) {
            return resonance_lc(p.at("L"), series_c(p.at("C1"), p.at("C2")));
        });

    add("cllc",
        "V1 1 0 {V}\n"
        "C1 1 2 {C1}\n"
        "L1 2 0 {L1}\n"
        "L2 2 3 {L2}\n"
        "C2 3 4 {C2}\n"
        "R1 4 0 {R}\n"
        ".freq {F}\n",
        {{"V", kVolt},
         {"C1", {1e-9, 1e-6, true}},
         {"L1", kInd},
         {"L2", kInd},
         {"C2", {1e-9, 1e-6, true}},
         {"R", kRes},
         {"ratio", kRatio}},
        [](const ParamMap& p) {
            return resonance_lc(p.at("L1") + p.at("L2"), series_c(p.at("C1"), p.at("C2")));
        });

    // Derived values: excitation frequency = ratio * resonance frequency.
    for (auto& t : out) {
        // capture by value; templates outlive this function
        auto res = t.resonance;
        t.params.shrink_to_fit();
        t.skeleton += ".mode CONT\n";
        t.finalize = [res](ParamMap& p) { p["F"] = p.at("ratio") * res(p); };
    }
    return out;
}

// ---------------------------------------------------------------------------
// Switching suite: buck / boost / buck-boost in continuous and discontinuous
// conduction mode. Each converter carries two complementary switches; the
// delayed one is marked by a control phase of pi. DCM duty cycles are drawn
// so that d1 + d2 lands in [0.5, 0.95], which both leaves a meaningful idle
// interval d3 and keeps the stored weights summing to exactly 1.
// ---------------------------------------------------------------------------

const ParamRange kVin{5.0, 100.0, true};
const ParamRange kSwInd{1e-5, 1e-3, true};
const ParamRange kSwCap{1e-6, 1e-4, true};
const ParamRange kLoad{1.0, 100.0, true};
const ParamRange kFsw{2e4, 2e5, true};
const ParamRange kDutyCcm{0.2, 0.8, false};
const ParamRange kDuty1Dcm{0.25, 0.6, false};
const ParamRange kUnit{0.0, 1.0, false};

std::string converter_skeleton(const std::string& topology, bool dcm) {
    const char* da = dcm ? "{d1}" : "{d}";
    const char* db = dcm ? "{d2}" : "{dbar}";
    std::string s;
    if (topology == "buck") {
        s = "V1 1 0 {V}\n"
            "S1 1 2 " + std::string(da) + "\n"
            "S2 2 0 " + std::string(db) + "\n"
            "L1 2 3 {L}\n"
            "C1 3 0 {C}\n"
            "R1 3 0 {R}\n";
    } else if (topology == "boost") {
        s = "V1 1 0 {V}\n"
            "L1 1 2 {L}\n"
            "S1 2 0 " + std::string(da) + "\n"
            "S2 2 3 " + std::string(db) + "\n"
            "C1 3 0 {C}\n"
            "R1 3 0 {R}\n";
    } else { // buck-boost
        s = "V1 1 0 {V}\n"
            "S1 1 2 " + std::string(da) + "\n"
            "L1 2 0 {L}\n"
            "S2 2 3 " + std::string(db) + "\n"
            "C1 3 0 {C}\n"
            "R1 3 0 {R}\n";
    }
    s += ".freq {fsw}\n";
    s += dcm ? ".mode DCM\n" : ".mode CCM\n";
    s += ".phase S2 {ph}\n";
    return s;
}

std::vector<ClassTemplate> make_switching6() {
    std::vector<ClassTemplate> out;
    const std::vector<std::string> topologies = {"buck", "boost", "buckboost"};

    for (int dcm = 0; dcm <= 1; ++dcm) {
        for (const auto& topo : topologies) {
            ClassTemplate t;
            t.name = topo + (dcm ? "-dcm" : "-ccm");
            t.class_id = static_cast<int>(out.size());
            t.mode = dcm ? CircuitMode::Dcm : CircuitMode::Ccm;
            t.skeleton = converter_skeleton(topo, dcm != 0);
            t.params = {{"V", kVin}, {"L", kSwInd}, {"C", kSwCap},
                        {"R", kLoad}, {"fsw", kFsw}};
            if (dcm) {
                t.params.emplace_back("d1", kDuty1Dcm);
                t.params.emplace_back("d2u", kUnit);
                t.finalize = [](ParamMap& p) {
                    p["d2"] = 0.25 + p.at("d2u") * (0.70 - p.at("d1"));
                    p["ph"] = kPi;
                };
                t.dcm_inductor = "L1";
            } else {
                t.params.emplace_back("d", kDutyCcm);
                t.finalize = [](ParamMap& p) {
                    p["dbar"] = 1.0 - p.at("d");
                    p["ph"] = kPi;
                };
            }
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::string substitute(const std::string& skeleton, const ParamMap& values) {
    std::string out;
    out.reserve(skeleton.size() + 64);
    for (std::size_t i = 0; i < skeleton.size();) {
        if (skeleton[i] != '{') {
            out += skeleton[i++];
            continue;
        }
        const auto close = skeleton.find('}', i);
        if (close == std::string::npos)
            throw Error("TemplateParameter", "unterminated placeholder in skeleton");
        const std::string key = skeleton.substr(i + 1, close - i - 1);
        const auto it = values.find(key);
        if (it == values.end())
            throw Error("TemplateParameter", "no value for placeholder '" + key + "'");
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", it->second);
        out += buf;
        i = close + 1;
    }
    return out;
}

std::vector<std::string> suite_class_names(Suite suite) {
    std::vector<std::string> names;
    for (const auto& t : suite_templates(suite)) names.push_back(t.name);
    return names;
}

} // namespace

Suite suite_from_string(const std::string& s) {
    if (s == "continuous7") return Suite::Continuous7;
    if (s == "switching6") return Suite::Switching6;
    throw Error("UnknownEnum", "unknown suite '" + s + "'");
}

const char* to_string(Suite suite) {
    return suite == Suite::Continuous7 ? "continuous7" : "switching6";
}

const std::vector<ClassTemplate>& suite_templates(Suite suite) {
    static const std::vector<ClassTemplate> continuous = make_continuous7();
    static const std::vector<ClassTemplate> switching = make_switching6();
    return suite == Suite::Continuous7 ? continuous : switching;
}

BondGraph instantiate(const ClassTemplate& tmpl, std::uint64_t seed_for_sample) {
    Rng rng(seed_for_sample);
    ParamMap values;
    for (const auto& [name, range] : tmpl.params)
        values[name] =
            range.log_scale ? rng.log_uniform(range.lo, range.hi) : rng.uniform(range.lo, range.hi);
    if (tmpl.finalize) tmpl.finalize(values);

    Circuit circuit = parse_netlist(substitute(tmpl.skeleton, values));
    circuit.class_label = tmpl.class_id;

    BondGraph graph = to_bond_graph(circuit);
    if (tmpl.mode == CircuitMode::Dcm)
        graph = apply_dcm_virtual_switch(graph, tmpl.dcm_inductor, values.at("d1"),
                                         values.at("d2"));
    graph.resonance_frequency = tmpl.resonance ? tmpl.resonance(values) : 0.0;
    return graph;
}

std::vector<BondGraph> generate_graphs(Suite suite, int per_class, std::uint64_t seed) {
    if (per_class < 1) throw Error("EmptyDataset", "per_class must be at least 1");
    const auto& templates = suite_templates(suite);
    const int total = static_cast<int>(templates.size()) * per_class;

    std::vector<BondGraph> graphs(total);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < total; ++idx) {
        try {
            const int c = idx / per_class;
            const int i = idx % per_class;
            graphs[idx] = instantiate(templates[c], derive_seed(seed, c, i));
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return graphs;
}

Dataset featurize_graphs(const std::vector<BondGraph>& graphs,
                         const std::vector<std::string>& class_names,
                         const FeatureConfig& config, std::uint64_t seed) {
    Dataset ds;
    ds.class_names = class_names;
    ds.feature_config = config;
    ds.seed = seed;
    ds.normalization = fit_normalization(graphs, config);

    ds.samples.resize(graphs.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < static_cast<int>(graphs.size()); ++i) {
        try {
            ds.samples[i] = featurize(graphs[i], ds.normalization, config);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return ds;
}

Dataset generate(Suite suite, int per_class, std::uint64_t seed, const FeatureConfig& config) {
    return featurize_graphs(generate_graphs(suite, per_class, seed),
                            suite_class_names(suite), config, seed);
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error("DegenerateSplit", "train fraction must lie strictly between 0 and 1");
    const int classes = dataset.class_count();
    if (classes == 0 || dataset.samples.empty())
        throw Error("EmptyDataset", "cannot split an empty dataset");

    std::vector<std::vector<int>> by_class(classes);
    for (int i = 0; i < static_cast<int>(dataset.samples.size()); ++i) {
        const int label = dataset.samples[i].label;
        if (label < 0 || label >= classes)
            throw Error("DimensionMismatch", "sample label outside the class range");
        by_class[label].push_back(i);
    }

    std::vector<int> train_idx, test_idx;
    for (int c = 0; c < classes; ++c) {
        auto& idx = by_class[c];
        const int n = static_cast<int>(idx.size());
        if (n < 2)
            throw Error("DegenerateSplit", "class " + std::to_string(c) +
                                               " cannot keep a sample on both sides");
        Rng rng(derive_seed(seed, 101, static_cast<std::uint64_t>(c)));
        rng.shuffle(idx);
        int k = static_cast<int>(std::floor(train_fraction * n + 0.5));
        k = std::max(1, std::min(n - 1, k));
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + k);
        test_idx.insert(test_idx.end(), idx.begin() + k, idx.end());
    }

    Rng(derive_seed(seed, 202)).shuffle(train_idx);
    Rng(derive_seed(seed, 303)).shuffle(test_idx);

    auto subset = [&dataset](const std::vector<int>& indices) {
        Dataset out;
        out.class_names = dataset.class_names;
        out.normalization = dataset.normalization; // reused verbatim, never refitted
        out.feature_config = dataset.feature_config;
        out.seed = dataset.seed;
        out.samples.reserve(indices.size());
        for (int i : indices) out.samples.push_back(dataset.samples[i]);
        return out;
    };
    return {subset(train_idx), subset(test_idx)};
}

// ---------------------------------------------------------------------------
// JSON-lines serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json config_to_json(const FeatureConfig& c) {
    return json{{"edge_mode", to_string(c.edge_mode)},
                {"cap_repr", to_string(c.cap_repr)},
                {"ind_repr", to_string(c.ind_repr)},
                {"include_phase_column", c.include_phase_column},
                {"include_frequency_column", c.include_frequency_column}};
}

FeatureConfig config_from_json(const json& j) {
    FeatureConfig c;
    c.edge_mode = edge_mode_from_string(j.at("edge_mode").get<std::string>());
    c.cap_repr = cap_repr_from_string(j.at("cap_repr").get<std::string>());
    c.ind_repr = ind_repr_from_string(j.at("ind_repr").get<std::string>());
    c.include_phase_column = j.at("include_phase_column").get<bool>();
    c.include_frequency_column = j.at("include_frequency_column").get<bool>();
    return c;
}

} // namespace

void save(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("IoError", "cannot open '" + path + "' for writing");

    json header{{"schema", 1},
                {"classes", dataset.class_names},
                {"feature_config", config_to_json(dataset.feature_config)},
                {"normalization", dataset.normalization.max_abs},
                {"seed", dataset.seed}};
    out << header.dump() << '\n';

    for (std::size_t k = 0; k < dataset.samples.size(); ++k) {
        const auto& s = dataset.samples[k];
        json x = json::array();
        for (int r = 0; r < s.x.rows(); ++r)
            x.push_back(std::vector<double>(s.x.row(r), s.x.row(r) + s.x.cols()));
        json edges = json::array();
        for (int i = 0; i < s.node_count(); ++i)
            for (int j = i + 1; j < s.node_count(); ++j)
                if (s.adjacency(i, j) != 0.0) edges.push_back(json{i, j, s.adjacency(i, j)});
        json line{{"id", k},
                  {"label", s.label},
                  {"n", s.node_count()},
                  {"x", std::move(x)},
                  {"edges", std::move(edges)}};
        out << line.dump() << '\n';
    }
    if (!out) throw Error("IoError", "short write to '" + path + "'");
}

Dataset load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IoError", "cannot open '" + path + "' for reading");

    std::string line;
    if (!std::getline(in, line)) throw Error("IoError", "'" + path + "' is empty");

    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw Error("IoError", "bad dataset header: " + std::string(e.what()));
    }
    if (!header.contains("schema") || !header["schema"].is_number_integer() ||
        header["schema"].get<int>() != 1)
        throw Error("SchemaVersionMismatch", "expected dataset schema 1");

    Dataset ds;
    try {
        ds.class_names = header.at("classes").get<std::vector<std::string>>();
        ds.feature_config = config_from_json(header.at("feature_config"));
        ds.normalization.max_abs =
            header.at("normalization").get<std::map<std::string, double>>();
        ds.seed = header.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw Error("IoError", "bad dataset header: " + std::string(e.what()));
    }

    const int dim = ds.feature_config.feature_dim();
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error("IoError", "line " + std::to_string(line_no) + ": " +
                                       std::string(e.what()));
        }
        GraphSample s;
        try {
            s.label = j.at("label").get<int>();
            const int n = j.at("n").get<int>();
            const auto& x = j.at("x");
            if (n < 1 || static_cast<int>(x.size()) != n)
                throw Error("SchemaVersionMismatch",
                            "line " + std::to_string(line_no) + ": node count mismatch");
            s.x.resize(n, dim);
            for (int r = 0; r < n; ++r) {
                const auto row = x.at(r).get<std::vector<double>>();
                if (static_cast<int>(row.size()) != dim)
                    throw Error("SchemaVersionMismatch",
                                "line " + std::to_string(line_no) +
                                    ": feature row width mismatch");
                std::copy(row.begin(), row.end(), s.x.row(r));
            }
            s.adjacency.resize(n, n);
            s.adjacency.fill(0.0);
            for (const auto& e : j.at("edges")) {
                const int a = e.at(0).get<int>();
                const int b = e.at(1).get<int>();
                const double w = e.at(2).get<double>();
                if (a < 0 || b <= a || b >= n)
                    throw Error("SchemaVersionMismatch",
                                "line " + std::to_string(line_no) + ": bad edge endpoints");
                s.adjacency(a, b) = w;
                s.adjacency(b, a) = w;
            }
            if (s.label < 0 || s.label >= ds.class_count())
                throw Error("SchemaVersionMismatch",
                            "line " + std::to_string(line_no) + ": label out of range");
        } catch (const json::exception& e) {
            throw Error("IoError", "line " + std::to_string(line_no) + ": " +
                                       std::string(e.what()));
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

} // namespace circuitgraph
