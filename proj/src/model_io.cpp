#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rdd/learn.hpp"

namespace rdd {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "rdd-model";

json info_to_json(const TrainingInfo& info) {
    return {{"converged", info.converged},
            {"iterations", info.iterations},
            {"final_loss", info.final_loss},
            {"final_grad_norm", info.final_grad_norm},
            {"samples", info.samples},
            {"train_ues", info.train_ues}};
}

TrainingInfo info_from_json(const json& j) {
    TrainingInfo info;
    info.converged = j.at("converged").get<bool>();
    info.iterations = j.at("iterations").get<int>();
    info.final_loss = j.at("final_loss").get<double>();
    info.final_grad_norm = j.at("final_grad_norm").get<double>();
    info.samples = j.at("samples").get<std::int64_t>();
    info.train_ues = j.at("train_ues").get<std::vector<int>>();
    return info;
}

json subset_to_json(const FeatureSubset& subset) {
    json arr = json::array();
    for (Feature f : subset) arr.push_back(std::string(feature_name(f)));
    return arr;
}

FeatureSubset subset_from_json(const json& j) {
    FeatureSubset out;
    for (const auto& name : j) out.push_back(parse_feature(name.get<std::string>()));
    if (out.empty()) throw Error("empty feature_subset");
    return out;
}

void check_tree(const TreeModel& m) {
    const auto n = static_cast<int>(m.nodes.size());
    if (n == 0) throw Error("tree has no nodes");
    for (int i = 0; i < n; ++i) {
        const TreeNode& node = m.nodes[i];
        if (!(node.leaf_probability >= 0.0 && node.leaf_probability <= 1.0))
            throw Error("leaf_probability outside [0, 1]");
        if (node.is_leaf()) continue;
        if (node.feature >= static_cast<int>(kFeatureCount)) throw Error("node feature out of range");
        // Preorder layout: children always follow their parent, which rules out cycles.
        if (node.left <= i || node.right <= i || node.left >= n || node.right >= n)
            throw Error("node children out of range");
    }
}

}  // namespace

double predict(const Model& model, const FeatureVector& x) {
    return std::visit(
        [&](const auto& m) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LogisticModel>) return predict_logistic(m, x);
            else return predict_tree(m, x);
        },
        model);
}

const FeatureSubset& model_features(const Model& model) {
    return std::visit([](const auto& m) -> const FeatureSubset& { return m.feature_subset; }, model);
}

const TrainingInfo& model_info(const Model& model) {
    return std::visit([](const auto& m) -> const TrainingInfo& { return m.info; }, model);
}

std::string model_type(const Model& model) {
    return std::holds_alternative<LogisticModel>(model) ? "lr" : "dt";
}

std::string model_to_json(const Model& model) {
    json j;
    j["format"] = kFormat;
    j["version"] = kModelFormatVersion;
    j["model_type"] = model_type(model);
    j["feature_subset"] = subset_to_json(model_features(model));
    // One model shared by every cell; the map is kept so per-cell models fit the schema.
    j["cell_models"] = {{"scope", "all_cells"}};
    j["training"] = info_to_json(model_info(model));
    if (const auto* lr = std::get_if<LogisticModel>(&model)) {
        j["standardizer"] = {{"mean", lr->standardizer.mean}, {"stddev", lr->standardizer.stddev}};
        j["parameters"] = {{"alpha", lr->alpha}, {"betas", lr->betas}};
    } else {
        const auto& dt = std::get<TreeModel>(model);
        json nodes = json::array();
        for (const auto& n : dt.nodes) {
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"leaf_probability", n.leaf_probability},
                             {"node_sample_fraction", n.node_sample_fraction},
                             {"impurity_decrease", n.impurity_decrease},
                             {"samples", n.samples}});
        }
        j["tree"] = {{"max_depth", dt.max_depth}, {"min_leaf", dt.min_leaf}, {"nodes", nodes}};
    }
    return j.dump(1);
}

Model model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormat) throw Error("not a model file");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw Error("unsupported model version " + std::to_string(version) + " (expected " +
                        std::to_string(kModelFormatVersion) + ")");
        const auto type = j.at("model_type").get<std::string>();
        const FeatureSubset subset = subset_from_json(j.at("feature_subset"));
        if (type == "lr") {
            LogisticModel m;
            m.feature_subset = subset;
            m.info = info_from_json(j.at("training"));
            m.standardizer.mean = j.at("standardizer").at("mean").get<std::array<double, kFeatureCount>>();
            m.standardizer.stddev = j.at("standardizer").at("stddev").get<std::array<double, kFeatureCount>>();
            m.alpha = j.at("parameters").at("alpha").get<double>();
            m.betas = j.at("parameters").at("betas").get<std::vector<double>>();
            if (m.betas.size() != m.feature_subset.size()) throw Error("betas do not match feature_subset");
            return m;
        }
        if (type == "dt") {
            TreeModel m;
            m.feature_subset = subset;
            m.info = info_from_json(j.at("training"));
            const auto& t = j.at("tree");
            m.max_depth = t.at("max_depth").get<int>();
            m.min_leaf = t.at("min_leaf").get<int>();
            for (const auto& n : t.at("nodes")) {
                TreeNode node;
                node.feature = n.at("feature").get<int>();
                node.threshold = n.at("threshold").get<double>();
                node.left = n.at("left").get<int>();
                node.right = n.at("right").get<int>();
                node.leaf_probability = n.at("leaf_probability").get<double>();
                node.node_sample_fraction = n.at("node_sample_fraction").get<double>();
                node.impurity_decrease = n.at("impurity_decrease").get<double>();
                node.samples = n.at("samples").get<std::int64_t>();
                m.nodes.push_back(node);
            }
            check_tree(m);
            return m;
        }
        throw Error("unknown model_type '" + type + "'");
    } catch (const json::exception& e) {
        throw Error(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError(path, "cannot open model file for writing");
    out << model_to_json(model) << '\n';
    out.close();
    if (out.fail()) throw IoError(path, "write failed");
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open model file");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return model_from_json(ss.str());
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        throw IoError(path, e.what());
    }
}

}  // namespace rdd
