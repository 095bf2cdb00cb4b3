#include "rcafuse/drain.hpp"

#include "rcafuse/errors.hpp"

#include "json.hpp"

#include <cctype>
#include <fstream>
#include <functional>

namespace rcafuse {

using nlohmann::json;

namespace {

constexpr const char* kWildcard = "<*>";
constexpr const char* kModelMagic = "rcafuse-drain";
constexpr int kModelVersion = 1;

std::vector<std::string> split_whitespace(const std::string& message) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < message.size()) {
        while (i < message.size() && std::isspace(static_cast<unsigned char>(message[i]))) ++i;
        std::size_t start = i;
        while (i < message.size() && !std::isspace(static_cast<unsigned char>(message[i]))) ++i;
        if (i > start) tokens.push_back(message.substr(start, i - start));
    }
    return tokens;
}

std::vector<std::regex> compile_rules(const std::vector<MaskRule>& rules) {
    std::vector<std::regex> out;
    out.reserve(rules.size());
    for (const auto& r : rules) {
        try {
            out.emplace_back(r.pattern, std::regex::ECMAScript | std::regex::optimize);
        } catch (const std::regex_error& e) {
            throw Error(ErrorCode::InvalidConfig, "bad masking pattern \"" + r.pattern + "\": " + e.what());
        }
    }
    return out;
}

}  // namespace

std::vector<MaskRule> default_mask_rules() {
    return {
        // pure numbers, incl. signs and decimals
        {R"([+-]?\d+(\.\d+)?)"},
        // hex identifiers of 8+ chars (request ids, span ids)
        {R"((0x)?[0-9a-fA-F]{8,})"},
        // IPv4, optionally with :port
        {R"(\d{1,3}(\.\d{1,3}){3}(:\d+)?)"},
        // key=value tokens whose value carries digits
        {R"(\S*=\S*\d\S*)"},
    };
}

std::string TemplateCluster::template_string() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::vector<std::string> mask_message(const std::string& message, const std::vector<MaskRule>& rules) {
    const auto compiled = compile_rules(rules);
    auto tokens = split_whitespace(message);
    for (auto& tok : tokens) {
        for (std::size_t r = 0; r < compiled.size(); ++r) {
            if (std::regex_match(tok, compiled[r])) {
                tok = rules[r].replacement;
                break;
            }
        }
    }
    return tokens;
}

DrainModel::DrainModel(DrainParams params) : params_(std::move(params)) {
    if (params_.tree_depth < 3) {
        throw Error(ErrorCode::InvalidConfig, "drain tree_depth must be >= 3");
    }
    if (params_.similarity_threshold <= 0.0 || params_.similarity_threshold >= 1.0) {
        throw Error(ErrorCode::InvalidConfig, "drain similarity_threshold must be in (0,1)");
    }
    if (params_.max_children_per_node < 1) {
        throw Error(ErrorCode::InvalidConfig, "drain max_children_per_node must be >= 1");
    }
    compiled_rules_ = compile_rules(params_.masking_rules);
}

std::vector<std::string> DrainModel::mask(const std::string& message) const {
    auto tokens = split_whitespace(message);
    for (auto& tok : tokens) {
        for (std::size_t r = 0; r < compiled_rules_.size(); ++r) {
            if (std::regex_match(tok, compiled_rules_[r])) {
                tok = params_.masking_rules[r].replacement;
                break;
            }
        }
    }
    return tokens;
}

double DrainModel::similarity(const std::vector<std::string>& cluster_tokens,
                              const std::vector<std::string>& tokens) {
    if (cluster_tokens.size() != tokens.size() || tokens.empty()) return 0.0;
    std::size_t equal = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (cluster_tokens[i] == tokens[i]) ++equal;
    }
    return static_cast<double>(equal) / static_cast<double>(tokens.size());
}

DrainModel::Node* DrainModel::route_for_training(const std::vector<std::string>& tokens) {
    Node* node = &root_;
    const std::string count_key = std::to_string(tokens.size());
    auto it = node->children.find(count_key);
    if (it == node->children.end()) {
        it = node->children.emplace(count_key, std::make_unique<Node>()).first;
    }
    node = it->second.get();

    const std::size_t levels = std::min<std::size_t>(params_.tree_depth - 2, tokens.size());
    for (std::size_t i = 0; i < levels; ++i) {
        std::string tok = tokens[i];
        auto child = node->children.find(tok);
        if (child == node->children.end()) {
            // full nodes route new leading tokens to the catch-all child
            if (node->children.size() >= static_cast<std::size_t>(params_.max_children_per_node) &&
                tok != kWildcard) {
                tok = kWildcard;
                child = node->children.find(tok);
            }
            if (child == node->children.end()) {
                child = node->children.emplace(tok, std::make_unique<Node>()).first;
            }
        }
        node = child->second.get();
    }
    return node;
}

const DrainModel::Node* DrainModel::route_for_matching(const std::vector<std::string>& tokens) const {
    const Node* node = &root_;
    auto it = node->children.find(std::to_string(tokens.size()));
    if (it == node->children.end()) return nullptr;
    node = it->second.get();

    const std::size_t levels = std::min<std::size_t>(params_.tree_depth - 2, tokens.size());
    for (std::size_t i = 0; i < levels; ++i) {
        auto child = node->children.find(tokens[i]);
        if (child == node->children.end()) {
            child = node->children.find(kWildcard);
            if (child == node->children.end()) return nullptr;
        }
        node = child->second.get();
    }
    return node;
}

void DrainModel::absorb(const std::vector<std::string>& tokens) {
    Node* leaf = route_for_training(tokens);

    int best_id = -1;
    double best_sim = -1.0;
    for (int id : leaf->cluster_ids) {
        const double sim = similarity(clusters_[id].tokens, tokens);
        if (sim > best_sim) {
            best_sim = sim;
            best_id = id;
        }
    }

    if (best_id >= 0 && best_sim >= params_.similarity_threshold) {
        auto& cluster = clusters_[best_id];
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (cluster.tokens[i] != tokens[i]) cluster.tokens[i] = kWildcard;
        }
        ++cluster.match_count;
        return;
    }

    TemplateCluster cluster;
    cluster.template_id = static_cast<int>(clusters_.size());
    cluster.tokens = tokens;
    cluster.match_count = 1;
    leaf->cluster_ids.push_back(cluster.template_id);
    clusters_.push_back(std::move(cluster));
}

DrainModel DrainModel::train(const std::vector<std::string>& corpus, DrainParams params) {
    if (corpus.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "drain training corpus is empty");
    }
    DrainModel model(std::move(params));
    std::size_t absorbed = 0;
    for (const auto& message : corpus) {
        const auto tokens = model.mask(message);
        if (tokens.empty()) continue;  // blank messages carry no template
        model.absorb(tokens);
        ++absorbed;
    }
    if (absorbed == 0) {
        throw Error(ErrorCode::EmptyCorpus, "no non-empty messages in drain training corpus");
    }
    return model;
}

std::optional<TemplateMatch> DrainModel::match(const std::string& message) const {
    const auto tokens = mask(message);
    if (tokens.empty()) return std::nullopt;
    const Node* leaf = route_for_matching(tokens);
    if (!leaf) return std::nullopt;

    int best_id = -1;
    double best_sim = -1.0;
    for (int id : leaf->cluster_ids) {
        const double sim = similarity(clusters_[id].tokens, tokens);
        if (sim > best_sim) {
            best_sim = sim;
            best_id = id;
        }
    }
    if (best_id < 0 || best_sim < params_.similarity_threshold) return std::nullopt;
    return TemplateMatch{best_id, clusters_[best_id].template_string()};
}

void DrainModel::save(const std::filesystem::path& path) const {
    json j;
    j["magic"] = kModelMagic;
    j["version"] = kModelVersion;
    json params;
    params["tree_depth"] = params_.tree_depth;
    params["similarity_threshold"] = params_.similarity_threshold;
    params["max_children_per_node"] = params_.max_children_per_node;
    json rules = json::array();
    for (const auto& r : params_.masking_rules) {
        rules.push_back({{"pattern", r.pattern}, {"replacement", r.replacement}});
    }
    params["masking_rules"] = rules;
    j["params"] = params;

    json clusters = json::array();
    for (const auto& c : clusters_) {
        clusters.push_back({{"id", c.template_id}, {"tokens", c.tokens}, {"match_count", c.match_count}});
    }
    j["clusters"] = clusters;

    // the tree serializes as nested {children, clusters} maps
    std::function<json(const Node&)> dump_node = [&](const Node& n) {
        json out;
        json children = json::object();
        for (const auto& [key, child] : n.children) {
            children[key] = dump_node(*child);
        }
        out["children"] = children;
        out["clusters"] = n.cluster_ids;
        return out;
    };
    j["tree"] = dump_node(root_);

    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + path.string());
    }
}

DrainModel DrainModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::UnreadableFile, path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("magic", "") != kModelMagic) {
        throw Error(ErrorCode::CorruptModelFile, path.string() + " has no drain model header");
    }
    if (j.value("version", -1) != kModelVersion) {
        throw Error(ErrorCode::CorruptModelFile,
                    path.string() + " has unsupported version " + std::to_string(j.value("version", -1)));
    }
    try {
        DrainParams params;
        const auto& p = j.at("params");
        params.tree_depth = p.at("tree_depth").get<int>();
        params.similarity_threshold = p.at("similarity_threshold").get<double>();
        params.max_children_per_node = p.at("max_children_per_node").get<int>();
        params.masking_rules.clear();
        for (const auto& r : p.at("masking_rules")) {
            params.masking_rules.push_back({r.at("pattern").get<std::string>(),
                                            r.at("replacement").get<std::string>()});
        }
        DrainModel model(std::move(params));

        for (const auto& c : j.at("clusters")) {
            TemplateCluster cluster;
            cluster.template_id = c.at("id").get<int>();
            cluster.tokens = c.at("tokens").get<std::vector<std::string>>();
            cluster.match_count = c.at("match_count").get<std::int64_t>();
            if (cluster.template_id != static_cast<int>(model.clusters_.size()) || cluster.tokens.empty()) {
                throw Error(ErrorCode::CorruptModelFile, "cluster table ids not dense in " + path.string());
            }
            model.clusters_.push_back(std::move(cluster));
        }

        std::function<void(Node&, const json&)> load_node = [&](Node& n, const json& src) {
            for (const auto& [key, child] : src.at("children").items()) {
                auto node = std::make_unique<Node>();
                load_node(*node, child);
                n.children.emplace(key, std::move(node));
            }
            n.cluster_ids = src.at("clusters").get<std::vector<int>>();
            for (int id : n.cluster_ids) {
                if (id < 0 || id >= static_cast<int>(model.clusters_.size())) {
                    throw Error(ErrorCode::CorruptModelFile, "dangling cluster id in " + path.string());
                }
            }
        };
        load_node(model.root_, j.at("tree"));
        return model;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptModelFile, path.string() + ": " + e.what());
    }
}

}  // namespace rcafuse
