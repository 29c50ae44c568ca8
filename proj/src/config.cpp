#include "gatecell/config.hpp"

#include <fstream>
#include <stdexcept>

namespace gatecell {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    try {
        if (value.empty() || value[0] == '-') throw std::invalid_argument("");
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected a non-negative integer, got '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument(key + ": expected true/false, got '" + value + "'");
}

} // namespace

void apply_config_value(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "variant") {
        const auto v = variant_from_name(value);
        if (!v) throw std::invalid_argument("variant: unknown name '" + value +
                                            "' (valid: vanilla, lstm1, lstm2, lstm3)");
        config.variant = *v;
    } else if (key == "task") {
        const auto t = task_from_name(value);
        if (!t) throw std::invalid_argument("task: unknown name '" + value +
                                            "' (valid: mnist-pixel, mnist-row, tokens)");
        config.task = *t;
    } else if (key == "hidden") {
        config.hidden = parse_count(key, value);
    } else if (key == "eta0") {
        config.eta0 = parse_real(key, value);
    } else if (key == "epochs") {
        config.epochs = parse_count(key, value);
    } else if (key == "batch_size") {
        config.batch_size = parse_count(key, value);
    } else if (key == "patience") {
        config.patience = parse_count(key, value);
    } else if (key == "seed") {
        config.seed = parse_count(key, value);
    } else if (key == "dropout_embed") {
        config.dropout.embed_rate = parse_real(key, value);
    } else if (key == "dropout_rows") {
        config.dropout.row_rate = parse_real(key, value);
    } else if (key == "forget_bias_init") {
        config.forget_bias_init = parse_real(key, value);
    } else if (key == "train_images") {
        config.train_images = value;
    } else if (key == "train_labels") {
        config.train_labels = value;
    } else if (key == "test_images") {
        config.test_images = value;
    } else if (key == "test_labels") {
        config.test_labels = value;
    } else if (key == "tokens_train") {
        config.tokens_train = value;
    } else if (key == "tokens_test") {
        config.tokens_test = value;
    } else if (key == "vocab_size") {
        config.vocab_size = parse_count(key, value);
    } else if (key == "embed_dim") {
        config.embed_dim = parse_count(key, value);
    } else if (key == "maxlen") {
        config.maxlen = parse_count(key, value);
    } else if (key == "train_limit") {
        config.train_limit = parse_count(key, value);
    } else if (key == "test_limit") {
        config.test_limit = parse_count(key, value);
    } else if (key == "clip_norm") {
        config.clip_norm = parse_real(key, value);
    } else if (key == "record_wall_time") {
        config.record_wall_time = parse_bool(key, value);
    } else if (key == "out_dir") {
        config.out_dir = value;
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_value(config, key, value);
        } catch (const std::invalid_argument& e) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

} // namespace gatecell
