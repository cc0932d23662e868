#include "disent/commands.hpp"

#include "disent/error.hpp"
#include "disent/harness.hpp"
#include "disent/io_util.hpp"
#include "disent/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace disent {

namespace fs = std::filesystem;

namespace {

fs::path path_or(const Config& c, const std::string& key, const std::string& fallback) {
    const auto v = c.get_string(key);
    return v.empty() ? fs::path(c.get_string("output.dir")) / fallback : fs::path(v);
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_int(std::string_view s, int& out) {
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::string format_score(double v) {
    std::string s = format_double(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::vector<int> read_label_file(const fs::path& path, const std::string& column) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<int> out;
    std::size_t col = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_commas(line);
        int v = 0;
        if (line_no == 1 && !(fields.size() == 1 && parse_int(fields[0], v))) {
            auto it = std::find(fields.begin(), fields.end(), column);
            require(it != fields.end(), ErrorKind::Format, path.string() + ": no column '" + column + "' in header");
            col = static_cast<std::size_t>(it - fields.begin());
            continue;
        }
        require(col < fields.size() && parse_int(fields[col], v), ErrorKind::Format,
                path.string() + ":" + std::to_string(line_no) + ": expected an integer label");
        out.push_back(v);
    }
    require(!out.empty(), ErrorKind::Format, path.string() + ": no labels");
    return out;
}

std::string cmd_gen_data(const Config& c) {
    const auto cfg = ExperimentConfig::from_config(c);
    const auto ds = load_dataset(cfg.data);
    const auto out = path_or(c, "data.output", "dataset.csv");
    save_dataset_csv(ds, out);
    return "wrote " + std::to_string(ds.size()) + " samples (" + ds.name + ") to " + out.string() + "\n";
}

std::string cmd_train(const Config& c) {
    const auto cfg = ExperimentConfig::from_config(c);
    const auto parts = prepare_splits(cfg.data);
    const auto result = train_method(cfg, parts.train, cfg.train.loss.kind, cfg.train.seed);
    const auto out = path_or(c, "model.path", "model.json");
    save_model(result.model, out);
    std::string text;
    for (const auto& e : result.log.epochs)
        text += "epoch=" + std::to_string(e.epoch) + " task_loss=" + format_double(e.task_loss) +
                " aux_loss=" + format_double(e.aux_loss) + " accuracy=" + format_double(e.accuracy) + "\n";
    const double val_acc =
        binary_accuracy(forward(result.model, parts.validation.features).yhat, parts.validation.group_labels);
    text += "validation_accuracy=" + format_score(val_acc) + "\nmodel=" + out.string() + "\n";
    return text;
}

std::string cmd_embed(const Config& c) {
    const auto cfg = ExperimentConfig::from_config(c);
    const auto model = load_model(path_or(c, "model.path", "model.json"));
    const auto which = c.get_string("embed.split");
    LabeledDataset ds = which == "all" ? load_dataset(cfg.data) : pick_split(prepare_splits(cfg.data), which);
    const int requested = static_cast<int>(c.get_int("embed.layer"));
    const int depth = static_cast<int>(model.depth());
    const int layer = requested == -1 ? depth - 2 : requested;
    require(layer >= 0 && layer < depth, ErrorKind::Validation,
            "embed.layer " + std::to_string(requested) + " outside model depth " + std::to_string(depth));
    ds.features = embed(model, ds.features, static_cast<std::size_t>(layer));
    const auto out = path_or(c, "embed.output", "embedding.csv");
    save_dataset_csv(ds, out);
    return "wrote " + std::to_string(ds.size()) + "x" + std::to_string(ds.features.cols()) +
           " embedding of layer " + std::to_string(layer) + " to " + out.string() + "\n";
}

std::string cmd_cluster(const Config& c) {
    const auto cfg = ExperimentConfig::from_config(c);
    const auto ds = load_dataset_csv(path_or(c, "cluster.input", "embedding.csv"));
    const auto res = kmeans(ds.features, cfg.cluster);
    std::string csv = "index,cluster,fine_label,group_label\n";
    for (std::size_t i = 0; i < ds.size(); ++i)
        csv += std::to_string(i) + "," + std::to_string(res.assignments[i]) + "," +
               std::to_string(ds.fine_labels[i]) + "," + std::to_string(ds.grouped() ? ds.group_labels[i] : -1) +
               "\n";
    const auto out = path_or(c, "cluster.output", "clusters.csv");
    write_file_atomic(out, csv);
    return "inertia=" + format_double(res.inertia) + " restart=" + std::to_string(res.restart_index) +
           "\nwrote " + out.string() + "\n";
}

std::string cmd_evaluate(const Config& c) {
    const auto cfg = ExperimentConfig::from_config(c);
    const auto truth_path = c.get_string("evaluate.truth");
    const auto pred_path = c.get_string("evaluate.pred");
    require(!truth_path.empty() && !pred_path.empty(), ErrorKind::Validation,
            "evaluate needs evaluate.truth and evaluate.pred");
    const auto truth = read_label_file(truth_path, c.get_string("evaluate.truth_column"));
    const auto pred = read_label_file(pred_path, c.get_string("evaluate.pred_column"));
    require(truth.size() == pred.size(), ErrorKind::Consistency,
            "label files differ in length: " + std::to_string(truth.size()) + " vs " + std::to_string(pred.size()));
    const auto s = score(truth, pred, cfg.ami_norm, cfg.nmi_norm);
    return "ami=" + format_score(s.ami) + "\nnmi=" + format_score(s.nmi) + "\n";
}

std::string cmd_run_experiment(const Config& c) {
    const auto cfg = ExperimentConfig::from_config(c);
    const auto report = run_experiment(cfg);
    write_report(report, cfg.output_dir);
    std::string text = "method,split,runs,ami_mean,ami_std,nmi_mean,train_acc_mean\n";
    for (const auto& s : report.summary)
        text += s.method + "," + s.split + "," + std::to_string(s.runs) + "," + format_double(s.ami_mean) + "," +
                format_double(s.ami_std) + "," + format_double(s.nmi_mean) + "," +
                format_double(s.train_acc_mean) + "\n";
    text += "wrote " + (cfg.output_dir / "report.json").string() + "\n";
    return text;
}

std::string cmd_sweep_k(const Config& c) {
    const auto cfg = ExperimentConfig::from_config(c);
    const auto kmin = c.get_int("sweep.k_min");
    const auto kmax = c.get_int("sweep.k_max");
    require(kmin >= 2 && kmax >= kmin, ErrorKind::Validation, "sweep needs 2 <= k_min <= k_max");
    const auto rows = sweep_k(cfg, static_cast<std::size_t>(kmin), static_cast<std::size_t>(kmax),
                              c.get_string("sweep.split"));
    const auto out = cfg.output_dir / "sweep.csv";
    write_file_atomic(out, sweep_csv(rows));
    return "wrote " + std::to_string(rows.size()) + " rows to " + out.string() + "\n";
}

std::string cmd_diagnostics(const Config& c) {
    const auto cfg = ExperimentConfig::from_config(c);
    const auto model = load_model(path_or(c, "model.path", "model.json"));
    const auto parts = prepare_splits(cfg.data);
    const auto& ds = pick_split(parts, c.get_string("diagnostics.split"));
    const int requested = static_cast<int>(c.get_int("diagnostics.layer"));
    const int layer = requested == -1 ? static_cast<int>(model.depth()) - 2 : requested;
    require(layer >= 0, ErrorKind::InvalidInput, "diagnostics.layer must be >= -1");
    const auto files = export_diagnostics(model, ds, static_cast<std::size_t>(layer), cfg.output_dir);
    const auto act = embed(model, ds.features, static_cast<std::size_t>(layer));
    return "active_neurons=" + std::to_string(count_spread_neurons(act, cfg.spread_fraction)) + "\nwrote " +
           files.histogram.string() + "\nwrote " + files.pca.string() + "\n";
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"gen-data", "train",          "embed",   "cluster",
                                                   "evaluate", "run-experiment", "sweep-k", "diagnostics"};
    return names;
}

std::string run_command(const std::string& name, const Config& c) {
    if (name == "gen-data") return cmd_gen_data(c);
    if (name == "train") return cmd_train(c);
    if (name == "embed") return cmd_embed(c);
    if (name == "cluster") return cmd_cluster(c);
    if (name == "evaluate") return cmd_evaluate(c);
    if (name == "run-experiment") return cmd_run_experiment(c);
    if (name == "sweep-k") return cmd_sweep_k(c);
    if (name == "diagnostics") return cmd_diagnostics(c);
    fail(ErrorKind::Validation, "unknown command '" + name + "'");
}

}  // namespace disent
