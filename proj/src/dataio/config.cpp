#include "lawq/dataio/config.hpp"

#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "lawq/dataio/files.hpp"
#include "lawq/dataio/idx.hpp"
#include "lawq/error.hpp"

namespace lawq::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Entry {
    std::string value;
    std::size_t line = 0;
};

using Section = std::map<std::string, Entry>;

class Values {
public:
    Values(const std::string& section, Section& entries) : section_(section), entries_(entries) {}

    const Entry* get(const std::string& key) {
        seen_.insert(key);
        const auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    [[noreturn]] void bad(const std::string& key, const Entry& e, const std::string& why) const {
        fail(ErrorCode::BadValue, "line " + std::to_string(e.line) + ": [" + section_ + "] " + key + "=" + e.value +
                                      ": " + why);
    }

    template <class T>
    void number(const std::string& key, T& out) {
        const Entry* e = get(key);
        if (!e) return;
        T v{};
        const char* end = e->value.data() + e->value.size();
        const auto res = std::from_chars(e->value.data(), end, v);
        if (res.ec != std::errc{} || res.ptr != end) bad(key, *e, "not a number");
        out = v;
    }

    void flag(const std::string& key, bool& out) {
        const Entry* e = get(key);
        if (!e) return;
        if (e->value == "true" || e->value == "1") {
            out = true;
        } else if (e->value == "false" || e->value == "0") {
            out = false;
        } else {
            bad(key, *e, "expected true or false");
        }
    }

    void list(const std::string& key, std::vector<std::size_t>& out) {
        const Entry* e = get(key);
        if (!e) return;
        out.clear();
        std::string_view rest = e->value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = trim(rest.substr(0, comma));
            std::size_t v = 0;
            const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
            if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
                bad(key, *e, "expected a comma-separated list of integers");
            }
            out.push_back(v);
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }

    void path(const std::string& key, std::filesystem::path& out, const std::filesystem::path& base) {
        const Entry* e = get(key);
        if (!e) return;
        std::filesystem::path p(e->value);
        out = p.is_relative() && !base.empty() ? base / p : p;
    }

    void reject_unknown() const {
        for (const auto& [key, e] : entries_) {
            if (!seen_.count(key)) {
                fail(ErrorCode::UnknownKey, "line " + std::to_string(e.line) + ": unknown key '" + key +
                                                "' in [" + section_ + "]");
            }
        }
    }

private:
    std::string section_;
    Section& entries_;
    std::set<std::string> seen_;
};

}  // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    static const std::set<std::string> known_sections = {"train", "quantizer", "schedule", "data"};
    std::map<std::string, Section> sections;
    std::string current;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(ErrorCode::BadValue, "line " + std::to_string(line_no) + ": malformed section");
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_sections.count(current)) {
                fail(ErrorCode::UnknownKey, "line " + std::to_string(line_no) + ": unknown section [" + current + "]");
            }
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(ErrorCode::BadValue, "line " + std::to_string(line_no) + ": expected key=value");
        }
        if (current.empty()) {
            fail(ErrorCode::BadValue, "line " + std::to_string(line_no) + ": key outside any section");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) fail(ErrorCode::BadValue, "line " + std::to_string(line_no) + ": empty key");
        if (!sections[current].emplace(key, Entry{value, line_no}).second) {
            fail(ErrorCode::BadValue, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }

    RunConfig cfg;
    nn::TrainConfig& t = cfg.train;

    Values quant("quantizer", sections["quantizer"]);
    const Entry* method = quant.get("method");
    if (!method) fail(ErrorCode::MissingRequired, "[quantizer] method is required");
    t.method = parse_method(method->value);
    // Table labels such as LAQ3(log) carry their own bits and scheme.
    const bool labelled = method->value.starts_with("LAQ");
    if (const Entry* bits = quant.get("bits")) {
        int v = 0;
        const auto res = std::from_chars(bits->value.data(), bits->value.data() + bits->value.size(), v);
        if (res.ec != std::errc{} || res.ptr != bits->value.data() + bits->value.size()) {
            quant.bad("bits", *bits, "not an integer");
        }
        if (labelled && v != t.method.bits) quant.bad("bits", *bits, "conflicts with the method label");
        t.method.bits = v;
    }
    if (const Entry* scheme = quant.get("scheme")) {
        const Scheme s = parse_scheme(scheme->value);
        if (labelled && s != t.method.scheme) quant.bad("scheme", *scheme, "conflicts with the method label");
        t.method.scheme = s;
    }
    quant.number("max_iterations", t.alternation.max_iterations);
    quant.number("tolerance", t.alternation.tolerance);
    quant.reject_unknown();

    Values train("train", sections["train"]);
    train.number("epochs", t.epochs);
    train.number("batch_size", t.batch_size);
    train.number("seed", t.seed);
    train.list("hidden", t.hidden);
    train.flag("batch_norm", t.batch_norm);
    train.number("init_range", t.init_range);
    train.flag("clip_gradients", t.clip_gradients);
    train.number("gradient_clip", t.gradient_clip);
    train.number("beta1", t.adam.beta1);
    train.number("beta2", t.adam.beta2);
    train.number("epsilon", t.adam.epsilon);
    train.flag("record_wall_time", t.record_wall_time);
    if (const Entry* loss = train.get("loss")) {
        if (loss->value == "square_hinge") {
            t.loss = nn::LossKind::SquareHinge;
        } else if (loss->value == "softmax") {
            t.loss = nn::LossKind::SoftmaxCrossEntropy;
        } else {
            train.bad("loss", *loss, "expected square_hinge or softmax");
        }
    }
    train.reject_unknown();

    Values sched("schedule", sections["schedule"]);
    if (const Entry* kind = sched.get("kind")) {
        if (kind->value == "milestone") {
            t.schedule.kind = nn::Schedule::Kind::Milestone;
        } else if (kind->value == "geometric") {
            t.schedule.kind = nn::Schedule::Kind::Geometric;
        } else {
            sched.bad("kind", *kind, "expected milestone or geometric");
        }
    }
    sched.number("initial_lr", t.schedule.initial);
    sched.number("factor", t.schedule.factor);
    sched.list("milestones", t.schedule.milestones);
    sched.number("start", t.schedule.start);
    sched.number("every", t.schedule.every);
    sched.reject_unknown();

    DataConfig& d = cfg.data;
    Values data("data", sections["data"]);
    if (const Entry* source = data.get("source")) {
        if (source->value == "idx") {
            d.source = DataConfig::Source::Idx;
        } else if (source->value == "synthetic") {
            d.source = DataConfig::Source::Synthetic;
        } else if (source->value == "separable2d") {
            d.source = DataConfig::Source::Separable2d;
        } else {
            data.bad("source", *source, "expected idx, synthetic or separable2d");
        }
    }
    data.path("train_images", d.train_images, base_dir);
    data.path("train_labels", d.train_labels, base_dir);
    data.path("test_images", d.test_images, base_dir);
    data.path("test_labels", d.test_labels, base_dir);
    data.number("val_fraction", d.val_fraction);
    data.number("split_seed", d.split_seed);
    data.number("train_limit", d.train_limit);
    data.number("test_limit", d.test_limit);
    data.number("synthetic_train", d.synthetic_train);
    data.number("synthetic_test", d.synthetic_test);
    data.number("synthetic_features", d.synthetic_features);
    data.number("synthetic_classes", d.synthetic_classes);
    data.reject_unknown();
    if (!(d.val_fraction >= 0.0 && d.val_fraction < 1.0)) {
        fail(ErrorCode::BadValue, "[data] val_fraction must lie in [0, 1)");
    }
    t.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                        path.parent_path());
}

nn::DataSplits load_data(const DataConfig& config) {
    nn::Dataset train;
    nn::Dataset test;
    switch (config.source) {
        case DataConfig::Source::Idx: {
            for (const auto* p : {&config.train_images, &config.train_labels, &config.test_images, &config.test_labels}) {
                if (p->empty()) {
                    fail(ErrorCode::MissingRequired,
                         "[data] train_images, train_labels, test_images and test_labels are required for source=idx");
                }
            }
            train = dataset_from_idx(read_idx(config.train_images), read_idx(config.train_labels), config.train_limit);
            test = dataset_from_idx(read_idx(config.test_images), read_idx(config.test_labels), config.test_limit);
            if (train.x.cols() != test.x.cols()) {
                fail(ErrorCode::ShapeMismatch, "train and test images have different sizes");
            }
            const std::size_t classes = std::max(train.classes, test.classes);
            train.classes = test.classes = classes;
            break;
        }
        case DataConfig::Source::Synthetic: {
            // One draw split in two keeps train and test on the same clusters.
            nn::Dataset all = nn::make_synthetic(config.synthetic_train + config.synthetic_test,
                                                 config.synthetic_features, config.synthetic_classes,
                                                 config.split_seed);
            std::vector<std::size_t> head(config.synthetic_train), tail(config.synthetic_test);
            for (std::size_t i = 0; i < head.size(); ++i) head[i] = i;
            for (std::size_t i = 0; i < tail.size(); ++i) tail[i] = head.size() + i;
            train = all.subset(head);
            test = all.subset(tail);
            break;
        }
        case DataConfig::Source::Separable2d:
            train = nn::make_separable_2d(config.synthetic_train, config.split_seed);
            test = nn::make_separable_2d(config.synthetic_test, config.split_seed + 1);
            break;
    }
    return nn::split_validation(std::move(train), std::move(test), config.val_fraction, config.split_seed);
}

}  // namespace lawq::io
