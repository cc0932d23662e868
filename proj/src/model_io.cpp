#include "disent/model_io.hpp"

#include "disent/error.hpp"
#include "disent/io_util.hpp"

#include <json.hpp>

namespace disent {

using nlohmann::json;

std::string model_to_json(const MlpModel& model) {
    model.validate();
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["layer_sizes"] = model.layer_sizes();
    json acts = json::array();
    for (auto a : model.activations()) acts.push_back(std::string(to_string(a)));
    doc["activations"] = acts;
    json weights = json::array();
    json biases = json::array();
    for (const auto& layer : model.layers) {
        json w = json::array();
        for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
            auto row = layer.weights.row(r);
            w.push_back(std::vector<double>(row.begin(), row.end()));
        }
        weights.push_back(std::move(w));
        biases.push_back(layer.bias);
    }
    doc["weights"] = std::move(weights);
    doc["biases"] = std::move(biases);
    doc["seed"] = model.seed;
    return doc.dump() + "\n";
}

MlpModel model_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Format, std::string("model JSON does not parse: ") + e.what());
    }
    try {
        const int version = doc.at("format_version").get<int>();
        require(version == kModelFormatVersion, ErrorKind::Format,
                "unsupported model format_version " + std::to_string(version));
        const auto sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
        const auto acts = doc.at("activations").get<std::vector<std::string>>();
        const auto& weights = doc.at("weights");
        const auto& biases = doc.at("biases");
        require(sizes.size() >= 2 && acts.size() == sizes.size() - 1 &&
                    weights.size() == acts.size() && biases.size() == acts.size(),
                ErrorKind::Format, "model JSON layer counts disagree");

        MlpModel model;
        model.seed = doc.at("seed").get<std::uint64_t>();
        for (std::size_t l = 0; l < acts.size(); ++l) {
            auto act = parse_activation(acts[l]);
            require(act.has_value(), ErrorKind::Format, "unknown activation '" + acts[l] + "'");
            const auto rows = weights[l].get<std::vector<std::vector<double>>>();
            DenseLayer layer{DenseMatrix::from_rows(rows), biases[l].get<std::vector<double>>(), *act};
            require(layer.out_dim() == sizes[l + 1] && layer.in_dim() == sizes[l], ErrorKind::Format,
                    "layer " + std::to_string(l) + " weights disagree with layer_sizes");
            model.layers.push_back(std::move(layer));
        }
        model.validate();
        return model;
    } catch (const json::exception& e) {
        fail(ErrorKind::Format, std::string("malformed model JSON: ") + e.what());
    }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, model_to_json(model));
}

MlpModel load_model(const std::filesystem::path& path) {
    return model_from_json(read_file(path));
}

}  // namespace disent
