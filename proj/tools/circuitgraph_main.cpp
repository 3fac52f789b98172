// Command-line frontend: convert single netlists, generate datasets, train,
// evaluate and embed the graph classifier, and run the feature-design
// experiment grids.
//
// Exit codes: 0 success, 1 bad input (netlist, file, configuration),
// 2 internal invariant failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "circuitgraph/bondgraph.hpp"
#include "circuitgraph/datagen.hpp"
#include "circuitgraph/gcn.hpp"
#include "circuitgraph/metrics.hpp"
#include "circuitgraph/netlist.hpp"
#include "circuitgraph/rng.hpp"

namespace cg = circuitgraph;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cg::Error("IoError", "cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw cg::Error("IoError", "cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw cg::Error("IoError", "short write to '" + path + "'");
}

json load_config_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw cg::Error("IoError", "bad config file: " + std::string(e.what()));
    }
}

/// Applies a config-file default to every option the user did not pass.
template <typename T>
void config_default(const json& cfg, const char* key, const CLI::Option* opt, T& target) {
    if (opt != nullptr && opt->count() == 0 && cfg.contains(key))
        target = cfg.at(key).get<T>();
}

// --- option bundles ---------------------------------------------------------

struct FeatureOpts {
    std::string edge_mode = "ones";
    std::string cap_repr = "inverse";
    std::string ind_repr = "raw";
    bool phase_column = false;
    bool frequency_column = false;
    CLI::Option* phase_opt = nullptr;
    CLI::Option* freq_opt = nullptr;

    void add_to(CLI::App* sub) {
        sub->add_option("--edge-mode", edge_mode,
                        "edge weights: ones|frequency|normalized-frequency|scaling-factor")
            ->default_val(edge_mode);
        sub->add_option("--cap-repr", cap_repr,
                        "capacitance representation: raw|inverse|negative-inverse")
            ->default_val(cap_repr);
        sub->add_option("--ind-repr", ind_repr, "inductance representation: raw|inverse")
            ->default_val(ind_repr);
        phase_opt = sub->add_flag("--phase-column,!--no-phase-column", phase_column,
                                  "include the control-phase feature column");
        freq_opt = sub->add_flag("--frequency-column,!--no-frequency-column",
                                 frequency_column, "include the frequency feature column");
    }

    cg::FeatureConfig to_config() const {
        cg::FeatureConfig c;
        c.edge_mode = cg::edge_mode_from_string(edge_mode);
        c.cap_repr = cg::cap_repr_from_string(cap_repr);
        c.ind_repr = cg::ind_repr_from_string(ind_repr);
        c.include_phase_column = phase_column;
        c.include_frequency_column = frequency_column;
        return c;
    }
};

// --- convert -----------------------------------------------------------------

json bond_graph_to_json(const cg::BondGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes)
        nodes.push_back({{"id", n.id},
                         {"kind", cg::to_string(n.kind)},
                         {"name", n.name},
                         {"value", n.value},
                         {"phase", n.phase}});
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back(json{e.a, e.b, e.weight});
    return json{{"nodes", std::move(nodes)},
                {"edges", std::move(edges)},
                {"mode", cg::to_string(g.mode)},
                {"frequency", g.frequency},
                {"resonance_frequency", g.resonance_frequency},
                {"class_label", g.class_label}};
}

std::string bond_graph_summary(const cg::BondGraph& g) {
    std::map<std::string, int> kind_counts;
    for (const auto& n : g.nodes) kind_counts[cg::to_string(n.kind)] += 1;
    std::ostringstream out;
    out << "nodes: " << g.nodes.size() << " (";
    bool first = true;
    for (const auto& [kind, count] : kind_counts) {
        if (!first) out << ", ";
        out << kind << ": " << count;
        first = false;
    }
    out << ")\nedges: " << g.edges.size() << "\nmode: " << cg::to_string(g.mode)
        << ", frequency: " << g.frequency << " Hz\n";
    return out.str();
}

cg::BondGraph convert_circuit(const cg::Circuit& circuit, double d1, double d2,
                              std::string inductor, bool duties_given) {
    cg::BondGraph graph = cg::to_bond_graph(circuit);
    if (circuit.mode != cg::CircuitMode::Dcm) return graph;

    // The virtual switched junction needs the two real duty cycles and the
    // inductor it bridges; default to the circuit's own switches/inductor.
    if (!duties_given) {
        std::vector<double> duties;
        for (const auto& e : circuit.elements)
            if (e.kind == cg::ElementKind::Switch) duties.push_back(e.value);
        if (duties.size() != 2)
            throw cg::Error("DutyOverflow",
                            "DCM circuits need exactly two switches, or explicit --d1/--d2");
        d1 = duties[0];
        d2 = duties[1];
    }
    if (inductor.empty()) {
        std::vector<std::string> inductors;
        for (const auto& e : circuit.elements)
            if (e.kind == cg::ElementKind::Inductor) inductors.push_back(e.name);
        if (inductors.size() != 1)
            throw cg::Error("NoSuchInductor",
                            "cannot infer the DCM inductor; give --dcm-inductor");
        inductor = inductors.front();
    }
    return cg::apply_dcm_virtual_switch(std::move(graph), inductor, d1, d2);
}

// --- shared train/eval helpers ------------------------------------------------

cg::Dataset select_split(const cg::Dataset& ds, const cg::Checkpoint& ckpt,
                         const std::string& which) {
    if (which == "all") return ds;
    if (!(ckpt.train_fraction > 0.0 && ckpt.train_fraction < 1.0)) {
        std::cerr << "note: checkpoint has no split metadata; using the whole dataset\n";
        return ds;
    }
    auto [tr, te] = cg::split(ds, ckpt.train_fraction, ckpt.split_seed);
    if (which == "train") return std::move(tr);
    if (which == "test") return std::move(te);
    throw cg::Error("UnknownEnum", "--split must be train, test or all");
}

void check_fingerprint(const cg::Dataset& ds, const cg::Checkpoint& ckpt) {
    if (ds.feature_config.fingerprint() != ckpt.feature_fingerprint)
        throw cg::Error("SchemaVersionMismatch",
                        "dataset feature configuration does not match the checkpoint");
}

std::string history_to_json(const cg::TrainHistory& history) {
    json arr = json::array();
    for (const auto& e : history)
        arr.push_back({{"train_loss", e.train_loss},
                       {"train_accuracy", e.train_accuracy},
                       {"test_accuracy", e.test_accuracy}});
    return arr.dump();
}

// --- embedding scatter plot ----------------------------------------------------

std::string scatter_svg(const std::vector<cg::EmbeddedPoint>& points,
                        const std::vector<std::string>& class_names) {
    static const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                                     "#b07aa1", "#76b7b2", "#edc948", "#9c755f",
                                     "#bab0ac", "#17becf"};
    const int kColors = 10;
    const double w = 720, h = 540, margin = 48;

    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    if (!points.empty()) {
        xmin = xmax = points[0].x;
        ymin = ymax = points[0].y;
        for (const auto& p : points) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    }
    if (xmax - xmin < 1e-30) { xmin -= 1.0; xmax += 1.0; }
    if (ymax - ymin < 1e-30) { ymin -= 1.0; ymax += 1.0; }
    const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (w - 2 * margin); };
    auto sy = [&](double y) { return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w << ' ' << h
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                  "fill=\"none\" stroke=\"#888\"/>\n",
                  margin, margin, w - 2 * margin, h - 2 * margin);
    out << buf;
    for (const auto& p : points) {
        const char* fill = kPalette[(p.true_label >= 0 ? p.true_label : 0) % kColors];
        const bool miss = p.predicted_label != p.true_label;
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3.5\" fill=\"%s\" "
                      "fill-opacity=\"0.75\"%s/>\n",
                      sx(p.x), sy(p.y), fill,
                      miss ? " stroke=\"#d00\" stroke-width=\"1.5\"" : "");
        out << buf;
    }
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        const double ly = margin + 16.0 + 18.0 * static_cast<double>(c);
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"5\" fill=\"%s\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" "
                      "font-family=\"sans-serif\">%zu %s</text>\n",
                      w - margin - 150.0, ly, kPalette[c % kColors], w - margin - 140.0,
                      ly + 4.0, c, class_names[c].c_str());
        out << buf;
    }
    out << "</svg>\n";
    return out.str();
}

// --- experiments ----------------------------------------------------------------

struct ExperimentResult {
    std::string set;
    std::string label;
    int classes = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

/// Filters graphs to a class subset, remapping labels to 0..k-1.
std::vector<cg::BondGraph> subset_graphs(const std::vector<cg::BondGraph>& graphs,
                                         const std::vector<int>& keep) {
    std::vector<cg::BondGraph> out;
    for (const auto& g : graphs) {
        const auto it = std::find(keep.begin(), keep.end(), g.class_label);
        if (it == keep.end()) continue;
        out.push_back(g);
        out.back().class_label = static_cast<int>(it - keep.begin());
    }
    return out;
}

ExperimentResult run_experiment(const std::vector<cg::BondGraph>& graphs,
                                const std::vector<std::string>& names,
                                const cg::FeatureConfig& fc, int epochs, std::uint64_t seed,
                                int threads, const std::string& set,
                                const std::string& label) {
    cg::Dataset ds = cg::featurize_graphs(graphs, names, fc, seed);
    auto [tr, te] = cg::split(ds, 0.7, cg::derive_seed(seed, 11));
    cg::TrainConfig tc;
    tc.epochs = epochs;
    tc.seed = cg::derive_seed(seed, 33);
    tc.threads = threads;
    auto [model, history] = cg::train(tr, te, cg::derive_seed(seed, 22), tc);

    ExperimentResult r;
    r.set = set;
    r.label = label;
    r.classes = ds.class_count();
    r.train_accuracy = cg::evaluate(model, tr, threads).accuracy;
    r.test_accuracy = cg::evaluate(model, te, threads).accuracy;
    return r;
}

cg::FeatureConfig experiment_config(cg::EdgeMode em, cg::CapRepr cr,
                                    cg::IndRepr ir = cg::IndRepr::Raw) {
    cg::FeatureConfig fc;
    fc.edge_mode = em;
    fc.cap_repr = cr;
    fc.ind_repr = ir;
    return fc;
}

std::vector<ExperimentResult> run_experiment_sets(const std::string& which, int per_class,
                                                  int epochs, std::uint64_t seed,
                                                  int threads) {
    using EM = cg::EdgeMode;
    using CR = cg::CapRepr;
    using IR = cg::IndRepr;

    const auto graphs = cg::generate_graphs(cg::Suite::Continuous7, per_class, seed);
    std::vector<std::string> all_names;
    for (const auto& t : cg::suite_templates(cg::Suite::Continuous7))
        all_names.push_back(t.name);

    // Sets 1-3 study feature design on the three hardest-to-separate classes;
    // set 4 scales the best configuration over growing class counts.
    const std::vector<int> trio = {2, 3, 5};
    const auto trio_graphs = subset_graphs(graphs, trio);
    std::vector<std::string> trio_names;
    for (int c : trio) trio_names.push_back(all_names[c]);

    auto wants = [&which](const char* set) { return which == "all" || which == set; };
    std::vector<ExperimentResult> results;

    if (wants("1")) {
        results.push_back(run_experiment(trio_graphs, trio_names,
                                         experiment_config(EM::Frequency, CR::Raw), epochs,
                                         seed, threads, "1", "edges=frequency cap=raw"));
        results.push_back(run_experiment(trio_graphs, trio_names,
                                         experiment_config(EM::Ones, CR::Raw), epochs, seed,
                                         threads, "1", "edges=ones cap=raw"));
        results.push_back(run_experiment(
            trio_graphs, trio_names, experiment_config(EM::NormalizedFrequency, CR::Raw),
            epochs, seed, threads, "1", "edges=normalized-frequency cap=raw"));
    }
    if (wants("2")) {
        for (const auto& [cr, label] :
             {std::pair{CR::Raw, "cap=raw"}, std::pair{CR::Inverse, "cap=inverse"},
              std::pair{CR::NegativeInverse, "cap=negative-inverse"}})
            results.push_back(run_experiment(
                trio_graphs, trio_names, experiment_config(EM::NormalizedFrequency, cr),
                epochs, seed, threads, "2",
                std::string("edges=normalized-frequency ") + label));
    }
    if (wants("3")) {
        results.push_back(run_experiment(
            trio_graphs, trio_names, experiment_config(EM::ScalingFactor, CR::Inverse),
            epochs, seed, threads, "3", "edges=scaling-factor cap=inverse"));
        results.push_back(run_experiment(trio_graphs, trio_names,
                                         experiment_config(EM::Ones, CR::Inverse), epochs,
                                         seed, threads, "3", "edges=ones cap=inverse"));
        results.push_back(run_experiment(
            trio_graphs, trio_names, experiment_config(EM::Ones, CR::Inverse, IR::Inverse),
            epochs, seed, threads, "3", "edges=ones cap=inverse ind=inverse"));
    }
    if (wants("4")) {
        for (int count : {4, 5, 7}) {
            std::vector<int> keep(count);
            std::iota(keep.begin(), keep.end(), 0);
            std::vector<std::string> names(all_names.begin(), all_names.begin() + count);
            results.push_back(run_experiment(
                subset_graphs(graphs, keep), names,
                experiment_config(EM::Ones, CR::Inverse), epochs, seed, threads, "4",
                std::to_string(count) + " classes, best config"));
        }
    }
    return results;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bond-graph circuit datasets and a graph-convolutional classifier"};
    app.require_subcommand(1);

    std::string config_path;

    // ---- convert ----
    auto* cmd_convert = app.add_subcommand(
        "convert", "convert one netlist file into a bond graph (JSON to stdout/--out)");
    std::string cv_netlist, cv_out = "-", cv_inductor;
    double cv_d1 = 0.0, cv_d2 = 0.0;
    cmd_convert->add_option("--netlist", cv_netlist, "input netlist file")->required();
    cmd_convert->add_option("--out", cv_out, "output path ('-' = stdout)");
    auto* cv_d1_opt = cmd_convert->add_option("--d1", cv_d1, "first DCM duty cycle");
    auto* cv_d2_opt = cmd_convert->add_option("--d2", cv_d2, "second DCM duty cycle");
    cmd_convert->add_option("--dcm-inductor", cv_inductor,
                            "inductor the DCM virtual switch bridges");
    cmd_convert->callback([&] {
        const cg::Circuit circuit = cg::parse_netlist(read_file(cv_netlist));
        const bool duties_given = cv_d1_opt->count() > 0 && cv_d2_opt->count() > 0;
        const cg::BondGraph graph =
            convert_circuit(circuit, cv_d1, cv_d2, cv_inductor, duties_given);
        const std::string text = bond_graph_to_json(graph).dump() + "\n";
        if (cv_out == "-") std::cout << text;
        else write_file(cv_out, text);
        std::cerr << bond_graph_summary(graph);
    });

    // ---- gen ----
    auto* cmd_gen = app.add_subcommand("gen", "generate a labeled graph dataset");
    std::string g_suite = "continuous7", g_out;
    int g_per_class = 857;
    std::uint64_t g_seed = 1;
    FeatureOpts g_feat;
    auto* g_suite_opt =
        cmd_gen->add_option("--suite", g_suite, "class suite: continuous7|switching6");
    auto* g_pc_opt = cmd_gen->add_option("--per-class", g_per_class, "samples per class");
    auto* g_seed_opt = cmd_gen->add_option("--seed", g_seed, "master generation seed");
    cmd_gen->add_option("--out", g_out, "output dataset file (JSON lines)")->required();
    g_feat.add_to(cmd_gen);
    cmd_gen->add_option("--config", config_path, "JSON config file with defaults");
    cmd_gen->callback([&] {
        if (!config_path.empty()) {
            const json cfg = load_config_file(config_path);
            config_default(cfg, "suite", g_suite_opt, g_suite);
            config_default(cfg, "per_class", g_pc_opt, g_per_class);
            config_default(cfg, "seed", g_seed_opt, g_seed);
        }
        const cg::Suite suite = cg::suite_from_string(g_suite);
        // The switching suite keys on control phase and switching frequency,
        // so those columns default to on there.
        if (g_feat.phase_opt->count() == 0)
            g_feat.phase_column = suite == cg::Suite::Switching6;
        if (g_feat.freq_opt->count() == 0)
            g_feat.frequency_column = suite == cg::Suite::Switching6;
        const cg::Dataset ds = cg::generate(suite, g_per_class, g_seed, g_feat.to_config());
        cg::save(ds, g_out);
        std::cerr << "wrote " << ds.samples.size() << " samples (" << ds.class_count()
                  << " classes) to " << g_out << "\n";
    });

    // ---- train ----
    auto* cmd_train = app.add_subcommand("train", "train the classifier on a dataset");
    std::string t_data, t_out, t_history;
    std::uint64_t t_seed = 1;
    int t_epochs = 1200, t_batch = 32, t_hidden = 32, t_layers = 3, t_threads = 0;
    double t_lr = 0.02, t_frac = 0.7;
    cmd_train->add_option("--data", t_data, "dataset file from 'gen'")->required();
    cmd_train->add_option("--out", t_out, "checkpoint output path")->required();
    cmd_train->add_option("--history", t_history, "optional per-epoch stats JSON");
    auto* t_seed_opt = cmd_train->add_option("--seed", t_seed, "master seed (split/init/shuffle)");
    auto* t_epochs_opt = cmd_train->add_option("--epochs", t_epochs, "training epochs");
    auto* t_lr_opt = cmd_train->add_option("--lr", t_lr, "Adam learning rate");
    auto* t_hidden_opt = cmd_train->add_option("--hidden", t_hidden, "hidden width");
    auto* t_layers_opt = cmd_train->add_option("--layers", t_layers, "propagation layers");
    auto* t_batch_opt = cmd_train->add_option("--batch", t_batch, "mini-batch size");
    auto* t_frac_opt = cmd_train->add_option("--train-frac", t_frac, "train split fraction");
    cmd_train->add_option("--threads", t_threads, "worker threads (0 = default)");
    cmd_train->add_option("--config", config_path, "JSON config file with defaults");
    cmd_train->callback([&] {
        if (!config_path.empty()) {
            const json cfg = load_config_file(config_path);
            config_default(cfg, "seed", t_seed_opt, t_seed);
            config_default(cfg, "epochs", t_epochs_opt, t_epochs);
            config_default(cfg, "lr", t_lr_opt, t_lr);
            config_default(cfg, "hidden", t_hidden_opt, t_hidden);
            config_default(cfg, "layers", t_layers_opt, t_layers);
            config_default(cfg, "batch", t_batch_opt, t_batch);
            config_default(cfg, "train_fraction", t_frac_opt, t_frac);
        }
        const cg::Dataset full = cg::load(t_data);
        const std::uint64_t split_seed = cg::derive_seed(t_seed, 11);
        auto [tr, te] = cg::split(full, t_frac, split_seed);

        cg::TrainConfig tc;
        tc.learning_rate = t_lr;
        tc.epochs = t_epochs;
        tc.batch_size = t_batch;
        tc.seed = cg::derive_seed(t_seed, 33);
        tc.hidden_dim = t_hidden;
        tc.layers = t_layers;
        tc.threads = t_threads;

        auto [model, history] = cg::train(tr, te, cg::derive_seed(t_seed, 22), tc);

        cg::Checkpoint ckpt;
        ckpt.model = std::move(model);
        ckpt.model_seed = cg::derive_seed(t_seed, 22);
        ckpt.feature_fingerprint = full.feature_config.fingerprint();
        ckpt.train_fraction = t_frac;
        ckpt.split_seed = split_seed;
        cg::save_model(ckpt, t_out);

        if (!t_history.empty()) write_file(t_history, history_to_json(history) + "\n");
        if (!history.empty()) {
            const auto& last = history.back();
            std::printf("epochs=%d train_loss=%.6f train_accuracy=%.4f test_accuracy=%.4f\n",
                        t_epochs, last.train_loss, last.train_accuracy, last.test_accuracy);
        }
    });

    // ---- eval ----
    auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string e_data, e_model, e_out, e_split = "test";
    int e_threads = 0;
    cmd_eval->add_option("--data", e_data, "dataset file")->required();
    cmd_eval->add_option("--model", e_model, "checkpoint file")->required();
    cmd_eval->add_option("--out", e_out, "write the JSON report here");
    cmd_eval->add_option("--split", e_split, "evaluate on: test|train|all (default test)");
    cmd_eval->add_option("--threads", e_threads, "worker threads (0 = default)");
    cmd_eval->callback([&] {
        const cg::Dataset full = cg::load(e_data);
        const cg::Checkpoint ckpt = cg::load_model(e_model);
        check_fingerprint(full, ckpt);
        const cg::Dataset part = select_split(full, ckpt, e_split);
        const cg::EvalReport report = cg::evaluate(ckpt.model, part, e_threads);
        std::cout << cg::format_report(report);
        if (!e_out.empty()) write_file(e_out, cg::report_to_json(report) + "\n");
    });

    // ---- embed ----
    auto* cmd_embed = app.add_subcommand(
        "embed", "project graph readouts to 2-D principal components");
    std::string m_data, m_model, m_out, m_svg, m_split = "test";
    int m_threads = 0;
    cmd_embed->add_option("--data", m_data, "dataset file")->required();
    cmd_embed->add_option("--model", m_model, "checkpoint file")->required();
    cmd_embed->add_option("--out", m_out, "CSV output path")->required();
    cmd_embed->add_option("--svg", m_svg, "optional scatter plot SVG path");
    cmd_embed->add_option("--split", m_split, "embed: test|train|all (default test)");
    cmd_embed->add_option("--threads", m_threads, "worker threads (0 = default)");
    cmd_embed->callback([&] {
        const cg::Dataset full = cg::load(m_data);
        const cg::Checkpoint ckpt = cg::load_model(m_model);
        check_fingerprint(full, ckpt);
        const cg::Dataset part = select_split(full, ckpt, m_split);
        bool degenerate = false;
        const auto points = cg::embed_2d(ckpt.model, part, &degenerate, m_threads);
        write_file(m_out, cg::embeddings_to_csv(points));
        if (degenerate)
            std::cerr << "warning: zero variance in readouts; all points at the origin\n";
        if (!m_svg.empty()) write_file(m_svg, scatter_svg(points, part.class_names));
    });

    // ---- experiments ----
    auto* cmd_exp = app.add_subcommand(
        "experiments", "run the feature-design experiment grids (continuous suite)");
    std::string x_set = "all", x_out;
    int x_per_class = 200, x_epochs = 120, x_threads = 0;
    std::uint64_t x_seed = 1;
    auto* x_set_opt = cmd_exp->add_option("--set", x_set, "grid to run: 1|2|3|4|all");
    auto* x_pc_opt = cmd_exp->add_option("--per-class", x_per_class, "samples per class");
    auto* x_epochs_opt = cmd_exp->add_option("--epochs", x_epochs, "epochs per experiment");
    auto* x_seed_opt = cmd_exp->add_option("--seed", x_seed, "master seed");
    cmd_exp->add_option("--out", x_out, "optional JSON results path");
    cmd_exp->add_option("--threads", x_threads, "worker threads (0 = default)");
    cmd_exp->add_option("--config", config_path, "JSON config file with defaults");
    cmd_exp->callback([&] {
        if (!config_path.empty()) {
            const json cfg = load_config_file(config_path);
            config_default(cfg, "set", x_set_opt, x_set);
            config_default(cfg, "per_class", x_pc_opt, x_per_class);
            config_default(cfg, "epochs", x_epochs_opt, x_epochs);
            config_default(cfg, "seed", x_seed_opt, x_seed);
        }
        const auto results =
            run_experiment_sets(x_set, x_per_class, x_epochs, x_seed, x_threads);
        std::printf("%-4s %-44s %8s %11s %10s\n", "set", "configuration", "classes",
                    "train_acc", "test_acc");
        json arr = json::array();
        for (const auto& r : results) {
            std::printf("%-4s %-44s %8d %11.4f %10.4f\n", r.set.c_str(), r.label.c_str(),
                        r.classes, r.train_accuracy, r.test_accuracy);
            arr.push_back({{"set", r.set},
                           {"configuration", r.label},
                           {"classes", r.classes},
                           {"train_accuracy", r.train_accuracy},
                           {"test_accuracy", r.test_accuracy}});
        }
        if (!x_out.empty()) write_file(x_out, arr.dump() + "\n");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const cg::Error& e) {
        if (e.code() == "InternalError") {
            std::cerr << "internal error: " << e.what() << "\n";
            return 2;
        }
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        if (const auto* invalid = dynamic_cast<const cg::InvalidCircuit*>(&e))
            for (const auto& v : invalid->violations())
                std::cerr << "  " << v.code << ": " << v.message << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
