#include "adaptcast/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "adaptcast/errors.hpp"
#include "adaptcast/text.hpp"

namespace adaptcast {

std::vector<ConfigEntry> parse_key_values(std::istream& in) {
    std::vector<ConfigEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = text::trim(view);
        if (view.empty()) continue;
        auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        auto key = text::trim(view.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        entries.push_back({std::string(key), std::string(text::trim(view.substr(eq + 1))), line_no});
    }
    return entries;
}

std::string_view to_string(LoopMode mode) { return mode == LoopMode::Online ? "online" : "offline"; }
std::string_view to_string(ModelKind kind) { return kind == ModelKind::Mlp ? "mlp" : "ar"; }
std::string_view to_string(DataSource source) { return source == DataSource::Csv ? "csv" : "synthetic"; }

WaveSpec parse_wave_spec(std::string_view text) {
    auto parts = text::split(text, ',');
    if (parts.size() != 4) throw ConfigError("wave '" + std::string(text) + "' must be start,peak,end,height");
    auto s = text::parse_int(parts[0]);
    auto p = text::parse_int(parts[1]);
    auto e = text::parse_int(parts[2]);
    auto h = text::parse_double(parts[3]);
    if (!s || !p || !e || !h) throw ConfigError("wave '" + std::string(text) + "' has a non-numeric field");
    return {static_cast<int>(*s), static_cast<int>(*p), static_cast<int>(*e), *h};
}

namespace {

std::size_t to_size(const std::string& v) {
    auto n = text::parse_int(v);
    if (!n || *n < 0) throw ConfigError("expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(*n);
}

std::uint64_t to_u64(const std::string& v) {
    auto n = text::parse_int(v);
    if (!n || *n < 0) throw ConfigError("expected a non-negative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(*n);
}

double to_real(const std::string& v) {
    auto x = text::parse_double(v);
    if (!x) throw ConfigError("expected a number, got '" + v + "'");
    return *x;
}

std::vector<std::size_t> to_size_list(const std::string& v) {
    std::vector<std::size_t> out;
    if (v == "none" || v.empty()) return out;
    for (const auto& part : text::split(v, ',')) out.push_back(to_size(part));
    return out;
}

DateRange parse_segment(const std::string& v) {
    // name:YYYY-MM-DD:YYYY-MM-DD, the name itself may not contain ':'.
    auto parts = text::split(v, ':');
    if (parts.size() != 3) throw ConfigError("segment '" + v + "' must be name:first:last");
    return {parts[0], parse_date_or_throw(parts[1], DateFormat::Iso, "segment start"),
            parse_date_or_throw(parts[2], DateFormat::Iso, "segment end")};
}

struct ParseState {
    bool waves_replaced = false;
    bool segments_replaced = false;
    std::optional<std::size_t> feature_window;
    std::filesystem::path base_dir;
};

using Setter = std::function<void(ExperimentConfig&, const std::string&, ParseState&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"name", [](auto& c, const auto& v, auto&) {
             if (v.empty() || v.find_first_of("/\\") != std::string::npos) {
                 throw ConfigError("name must be non-empty and contain no path separators");
             }
             c.name = v;
         }},
        {"source", [](auto& c, const auto& v, auto&) {
             if (v == "csv") c.source = DataSource::Csv;
             else if (v == "synthetic") c.source = DataSource::Synthetic;
             else throw ConfigError("expected csv or synthetic");
         }},
        {"csv.path", [](auto& c, const auto& v, auto& st) {
             std::filesystem::path p(v);
             c.csv_path = p.is_absolute() ? p : (st.base_dir / p).lexically_normal();
         }},
        {"csv.date_column", [](auto& c, const auto& v, auto&) { c.schema.date_column = v; }},
        {"csv.value_column", [](auto& c, const auto& v, auto&) { c.schema.value_column = v; }},
        {"csv.covariates", [](auto& c, const auto& v, auto&) {
             if (v == "all") {
                 c.schema.covariate_columns.reset();
             } else if (v == "none") {
                 c.schema.covariate_columns = std::vector<std::string>{};
             } else {
                 c.schema.covariate_columns = text::split(v, ',');
             }
         }},
        {"date_format", [](auto& c, const auto& v, auto&) { c.schema.date_format = parse_date_format(v); }},
        {"low_count_threshold", [](auto& c, const auto& v, auto&) { c.low_count_threshold = to_real(v); }},
        {"synthetic.preset", [](auto& c, const auto& v, auto& st) {
             if (v != "paper") throw ConfigError("only the 'paper' preset exists");
             auto preset = paper_like_synthetic_config(c.synthetic.noise, c.synthetic.seed);
             c.synthetic = preset;
             st.waves_replaced = false;
         }},
        {"synthetic.wave", [](auto& c, const auto& v, auto& st) {
             if (!st.waves_replaced) {
                 c.synthetic.waves.clear();
                 st.waves_replaced = true;
             }
             if (v != "none") c.synthetic.waves.push_back(parse_wave_spec(v));
         }},
        {"synthetic.length", [](auto& c, const auto& v, auto&) { c.synthetic.length = static_cast<int>(to_size(v)); }},
        {"synthetic.baseline", [](auto& c, const auto& v, auto&) { c.synthetic.baseline = to_real(v); }},
        {"synthetic.noise", [](auto& c, const auto& v, auto&) { c.synthetic.noise = to_real(v); }},
        {"synthetic.seed", [](auto& c, const auto& v, auto&) { c.synthetic.seed = to_u64(v); }},
        {"synthetic.floor", [](auto& c, const auto& v, auto&) { c.synthetic.floor = to_real(v); }},
        {"synthetic.start_date", [](auto& c, const auto& v, auto&) {
             c.synthetic.start_date = parse_date_or_throw(v, DateFormat::Iso, "synthetic.start_date");
         }},
        {"window", [](auto& c, const auto& v, auto&) { c.window = to_size(v); }},
        {"horizon", [](auto& c, const auto& v, auto&) { c.horizon = to_size(v); }},
        {"memory", [](auto& c, const auto& v, auto&) {
             c.memory = to_size(v);
             c.memory_explicit = true;
         }},
        {"mode", [](auto& c, const auto& v, auto&) {
             if (v == "online") c.mode = LoopMode::Online;
             else if (v == "offline") c.mode = LoopMode::Offline;
             else throw ConfigError("expected online or offline");
         }},
        {"model", [](auto& c, const auto& v, auto&) {
             if (v == "mlp") c.model = ModelKind::Mlp;
             else if (v == "ar" || v == "arima") c.model = ModelKind::Ar;
             else throw ConfigError("expected mlp or ar");
         }},
        {"feature", [](auto& c, const auto& v, auto&) {
             if (!c.features) c.features = FeatureSpec{};
             c.features->items.push_back(parse_feature_item(v));
         }},
        {"feature_preset", [](auto& c, const auto& v, auto&) {
             if (v == "none") {
                 c.features.reset();
             } else if (v == "paper") {
                 c.features = default_paper_spec();
             } else {
                 throw ConfigError("expected paper or none");
             }
         }},
        {"feature_window", [](auto&, const auto& v, auto& st) { st.feature_window = to_size(v); }},
        {"hidden", [](auto& c, const auto& v, auto&) { c.hidden = to_size_list(v); }},
        {"learning_rate", [](auto& c, const auto& v, auto&) { c.train.learning_rate = to_real(v); }},
        {"beta1", [](auto& c, const auto& v, auto&) { c.train.beta1 = to_real(v); }},
        {"beta2", [](auto& c, const auto& v, auto&) { c.train.beta2 = to_real(v); }},
        {"epsilon", [](auto& c, const auto& v, auto&) { c.train.epsilon = to_real(v); }},
        {"leaky_slope", [](auto& c, const auto& v, auto&) { c.train.leaky_slope = to_real(v); }},
        {"weight_decay", [](auto& c, const auto& v, auto&) { c.train.weight_decay = to_real(v); }},
        {"epochs", [](auto& c, const auto& v, auto&) { c.train.epochs_per_step = to_size(v); }},
        {"repetitions", [](auto& c, const auto& v, auto&) { c.repetitions = to_size(v); }},
        {"seed", [](auto& c, const auto& v, auto&) { c.seed = to_u64(v); }},
        {"pretrain_days", [](auto& c, const auto& v, auto&) { c.pretrain_days = to_size(v); }},
        {"ar_fit_window", [](auto& c, const auto& v, auto&) { c.ar_fit_window = to_size(v); }},
        {"normalization", [](auto& c, const auto& v, auto&) { c.normalization = parse_scale_mode(v); }},
        {"segment", [](auto& c, const auto& v, auto& st) {
             if (!st.segments_replaced) {
                 c.segments.waves.clear();
                 st.segments_replaced = true;
             }
             if (v != "none") c.segments.waves.push_back(parse_segment(v));
         }},
        {"output_dir", [](auto& c, const auto& v, auto& st) {
             std::filesystem::path p(v);
             c.output_dir = p.is_absolute() ? p : (st.base_dir / p).lexically_normal();
         }},
    };
    return table;
}

}  // namespace

ExperimentConfig config_from_entries(const std::vector<ConfigEntry>& entries, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    cfg.output_dir = (base_dir / "runs").lexically_normal();
    ParseState state;
    state.base_dir = base_dir;
    for (const auto& entry : entries) {
        auto where = "line " + std::to_string(entry.line) + ": '" + entry.key + "': ";
        auto it = setters().find(entry.key);
        if (it == setters().end()) throw ConfigError(where + "unknown key");
        try {
            it->second(cfg, entry.value, state);
        } catch (const Error& e) {
            throw ConfigError(where + e.what());
        }
    }
    if (state.feature_window) {
        if (!cfg.features) throw ConfigError("'feature_window': set without any feature");
        cfg.features->window = *state.feature_window;
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    return config_from_entries(parse_key_values(in), base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    try {
        return parse_config(in, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) { throw ConfigError("'" + field + "': " + msg); };
    if (window == 0) fail("window", "must be at least 1");
    if (horizon == 0) fail("horizon", "must be at least 1");
    if (memory == 0) fail("memory", "must be at least 1");
    if (repetitions == 0) fail("repetitions", "must be at least 1");
    if (ar_fit_window < 3) fail("ar_fit_window", "must be at least 3");
    if (source == DataSource::Csv && csv_path.empty()) fail("csv.path", "required when source = csv");
    if (!(low_count_threshold >= 0.0)) fail("low_count_threshold", "must be non-negative");
    for (auto h : hidden) {
        if (h == 0) fail("hidden", "layer sizes must be at least 1");
    }
    try {
        train.validate();
        if (features) features->validate();
        segments.validate();
        if (source == DataSource::Synthetic) synthetic.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    const std::size_t lookback = features ? features->window : window;
    if (mode == LoopMode::Offline && pretrain_days < lookback + horizon) {
        fail("pretrain_days", "must be at least lookback + horizon = " + std::to_string(lookback + horizon));
    }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::canonical_entries() const {
    std::vector<std::pair<std::string, std::string>> e;
    auto num = [](double v) { return text::format_exact(v); };
    e.emplace_back("name", name);
    e.emplace_back("source", std::string(to_string(source)));
    if (source == DataSource::Csv) {
        e.emplace_back("csv.path", csv_path.string());
        e.emplace_back("csv.date_column", schema.date_column);
        e.emplace_back("csv.value_column", schema.value_column);
        if (schema.covariate_columns) {
            std::string joined;
            for (const auto& c : *schema.covariate_columns) joined += (joined.empty() ? "" : ",") + c;
            e.emplace_back("csv.covariates", joined.empty() ? "none" : joined);
        } else {
            e.emplace_back("csv.covariates", "all");
        }
        e.emplace_back("date_format", std::string(to_string(schema.date_format)));
    } else {
        e.emplace_back("synthetic.length", std::to_string(synthetic.length));
        e.emplace_back("synthetic.baseline", num(synthetic.baseline));
        e.emplace_back("synthetic.noise", num(synthetic.noise));
        e.emplace_back("synthetic.seed", std::to_string(synthetic.seed));
        e.emplace_back("synthetic.floor", num(synthetic.floor));
        e.emplace_back("synthetic.start_date", format_iso(synthetic.start_date));
        if (synthetic.waves.empty()) e.emplace_back("synthetic.wave", "none");
        for (const auto& w : synthetic.waves) {
            e.emplace_back("synthetic.wave", std::to_string(w.start_day) + "," + std::to_string(w.peak_day) + "," +
                                                 std::to_string(w.end_day) + "," + num(w.peak_height));
        }
    }
    e.emplace_back("low_count_threshold", num(low_count_threshold));
    e.emplace_back("model", std::string(to_string(model)));
    e.emplace_back("mode", std::string(to_string(mode)));
    e.emplace_back("window", std::to_string(window));
    e.emplace_back("horizon", std::to_string(horizon));
    e.emplace_back("memory", std::to_string(memory));
    if (features) {
        for (const auto& item : features->items) {
            e.emplace_back("feature", item.column + ":" + std::string(to_string(item.aggregator)));
        }
        e.emplace_back("feature_window", std::to_string(features->window));
    }
    std::string hidden_text;
    for (auto h : hidden) hidden_text += (hidden_text.empty() ? "" : ",") + std::to_string(h);
    e.emplace_back("hidden", hidden_text.empty() ? "none" : hidden_text);
    e.emplace_back("learning_rate", num(train.learning_rate));
    e.emplace_back("beta1", num(train.beta1));
    e.emplace_back("beta2", num(train.beta2));
    e.emplace_back("epsilon", num(train.epsilon));
    e.emplace_back("leaky_slope", num(train.leaky_slope));
    e.emplace_back("weight_decay", num(train.weight_decay));
    e.emplace_back("epochs", std::to_string(train.epochs_per_step));
    e.emplace_back("repetitions", std::to_string(repetitions));
    e.emplace_back("seed", std::to_string(seed));
    e.emplace_back("pretrain_days", std::to_string(pretrain_days));
    e.emplace_back("ar_fit_window", std::to_string(ar_fit_window));
    e.emplace_back("normalization", std::string(to_string(normalization)));
    if (segments.waves.empty()) e.emplace_back("segment", "none");
    for (const auto& s : segments.waves) {
        e.emplace_back("segment", s.name + ":" + format_iso(s.first) + ":" + format_iso(s.last));
    }
    return e;
}

std::string ExperimentConfig::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : canonical_entries()) out += k + " = " + v + "\n";
    return out;
}

std::uint64_t ExperimentConfig::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical_text()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string ExperimentConfig::hash_hex() const {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, hash());
    return buf;
}

}  // namespace adaptcast
