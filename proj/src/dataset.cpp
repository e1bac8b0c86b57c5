#include "whisker/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "whisker/csv.hpp"
#include "whisker/seed.hpp"

namespace whisker {

std::string to_string(Selector s) {
    switch (s) {
    case Selector::P: return "P";
    case Selector::A: return "A";
    case Selector::PA: return "PA";
    case Selector::L: return "L";
    }
    return "?";
}

Selector selector_from_string(const std::string& text) {
    if (text == "P") return Selector::P;
    if (text == "A") return Selector::A;
    if (text == "PA") return Selector::PA;
    if (text == "L") return Selector::L;
    throw std::invalid_argument("unknown selector: " + text);
}

int channels_per_step(Selector s) {
    switch (s) {
    case Selector::P: return 1;
    case Selector::A: return 3;
    case Selector::PA: return 4;
    case Selector::L: return 1;
    }
    return 0;
}

std::string to_string(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "?";
}

Split split_from_string(const std::string& text) {
    if (text == "train") return Split::Train;
    if (text == "val") return Split::Val;
    if (text == "test") return Split::Test;
    throw std::invalid_argument("unknown split: " + text);
}

WindowingResult window_split(const FusedStream& stream, int window, int stride) {
    if (window < 1 || stride < 1)
        throw std::invalid_argument("window_split: W and stride must be >= 1");
    WindowingResult result;
    const Eigen::Index m = stream.data.rows();
    const Eigen::Index k = stream.data.cols();
    if (m < window) {
        result.status = WindowStatus::InsufficientData;
        return result;
    }
    const Eigen::Index count = (m - window) / stride + 1;
    result.windows.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index j = 0; j < count; ++j) {
        WindowedSample s;
        s.label = stream.label;
        s.source_id = stream.source_id;
        s.window_index = static_cast<int>(j);
        s.features.resize(window * k);
        // Row-major flatten: all channels of x_j, then x_{j+1}, ...
        for (Eigen::Index t = 0; t < window; ++t)
            s.features.segment(t * k, k) = stream.data.row(j * stride + t).transpose();
        result.windows.push_back(std::move(s));
    }
    return result;
}

RecordingStreams streams_of(const SweepRecording& recording, double stream_rate_hz) {
    RecordingStreams r;
    r.label = recording.label;
    r.whisker = fuse_to_stream(recording, stream_rate_hz);
    r.source_id = r.whisker.source_id;
    r.laser = laser_stream(recording, stream_rate_hz);
    return r;
}

RecordingStreams streams_of(const DabRecording& recording, double stream_rate_hz) {
    RecordingStreams r;
    r.label = recording.label;
    r.whisker = fuse_to_stream(recording, stream_rate_hz);
    r.source_id = r.whisker.source_id;
    return r;
}

std::vector<Eigen::Index> LabeledDataset::indices_of(Split s) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < splits.size(); ++i)
        if (splits[i] == s) out.push_back(static_cast<Eigen::Index>(i));
    return out;
}

Eigen::MatrixXd LabeledDataset::features_of(Split s) const {
    const auto idx = indices_of(s);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), features.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = features.row(idx[i]);
    return out;
}

Eigen::VectorXi LabeledDataset::labels_of(Split s) const {
    const auto idx = indices_of(s);
    Eigen::VectorXi out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = labels[static_cast<std::size_t>(idx[i])];
    return out;
}

WindowedSample LabeledDataset::sample(Eigen::Index i) const {
    const auto u = static_cast<std::size_t>(i);
    return {features.row(i).transpose(), class_set[static_cast<std::size_t>(labels[u])],
            source_ids[u], window_indices[u]};
}

namespace {

FusedStream select_channels(const RecordingStreams& rec, Selector selector) {
    if (selector == Selector::L) {
        if (!rec.laser) throw std::invalid_argument("recording " + rec.source_id + " has no laser");
        return *rec.laser;
    }
    FusedStream s = rec.whisker;
    if (s.data.cols() != 4)
        throw std::invalid_argument("whisker stream must carry P, Ax, Ay, Az");
    if (selector == Selector::P) {
        s.data = rec.whisker.data.col(0);
        s.channel_names = {"P"};
    } else if (selector == Selector::A) {
        s.data = rec.whisker.data.rightCols(3);
        s.channel_names = {"Ax", "Ay", "Az"};
    }
    return s;
}

} // namespace

LabeledDataset assemble_dataset(const std::vector<RecordingStreams>& recordings,
                                Selector selector, int window, std::uint64_t seed,
                                int decimation) {
    if (window < 1) throw std::invalid_argument("assemble_dataset: W must be >= 1");

    LabeledDataset d;
    d.selector = selector;
    d.window = window;
    d.k = channels_per_step(selector);
    d.split_seed = seed;

    std::map<std::string, int> per_class;
    for (const auto& r : recordings) {
        if (per_class.emplace(r.label, 0).second) d.class_set.push_back(r.label);
        ++per_class[r.label];
    }
    for (const auto& label : d.class_set)
        if (per_class[label] < kMinRecordingsPerClass) throw InsufficientSweeps(label);

    std::vector<WindowedSample> all;
    for (const auto& r : recordings) {
        FusedStream s = select_channels(r, selector);
        if (decimation != 1) s = decimate_stream(s, decimation);
        s.source_id = r.source_id;
        auto w = window_split(s, window, window);
        for (auto& sample : w.windows) all.push_back(std::move(sample));
    }

    const auto n = static_cast<Eigen::Index>(all.size());
    d.features.resize(n, static_cast<Eigen::Index>(window) * d.k);
    d.labels.resize(all.size());
    d.source_ids.resize(all.size());
    d.window_indices.resize(all.size());
    d.splits.assign(all.size(), Split::Train);
    std::map<std::string, int> class_index;
    for (std::size_t c = 0; c < d.class_set.size(); ++c)
        class_index[d.class_set[c]] = static_cast<int>(c);
    std::vector<std::vector<std::size_t>> members(d.class_set.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        d.features.row(static_cast<Eigen::Index>(i)) = all[i].features.transpose();
        d.labels[i] = class_index[all[i].label];
        d.source_ids[i] = all[i].source_id;
        d.window_indices[i] = all[i].window_index;
        members[static_cast<std::size_t>(d.labels[i])].push_back(i);
    }

    for (std::size_t c = 0; c < members.size(); ++c) {
        auto& m = members[c];
        std::mt19937_64 rng(derive_seed(seed, {tag_of("split"), c}));
        std::shuffle(m.begin(), m.end(), rng);
        const auto total = static_cast<double>(m.size());
        const auto n_train = static_cast<std::size_t>(std::llround(0.7 * total));
        const auto n_val = std::min(m.size() - n_train,
                                    static_cast<std::size_t>(std::llround(0.2 * total)));
        for (std::size_t i = 0; i < m.size(); ++i)
            d.splits[m[i]] = i < n_train ? Split::Train
                             : i < n_train + n_val ? Split::Val
                                                   : Split::Test;
    }

    d.stats = compute_train_stats(d);
    return d;
}

namespace {

template <typename A, typename B>
bool same(const A& a, const B& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

} // namespace

bool LabeledDataset::operator==(const LabeledDataset& o) const {
    return selector == o.selector && window == o.window && k == o.k &&
           split_seed == o.split_seed && class_set == o.class_set && same(features, o.features) &&
           labels == o.labels && source_ids == o.source_ids && window_indices == o.window_indices &&
           splits == o.splits && same(stats.mean, o.stats.mean) && same(stats.sd, o.stats.sd);
}

StandardizationStats compute_train_stats(const LabeledDataset& dataset) {
    const Eigen::Index f = dataset.feature_count();
    StandardizationStats st{Eigen::VectorXd::Zero(f), Eigen::VectorXd::Ones(f)};
    const auto idx = dataset.indices_of(Split::Train);
    if (idx.empty()) return st;
    for (auto i : idx) st.mean += dataset.features.row(i).transpose();
    st.mean /= static_cast<double>(idx.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(f);
    for (auto i : idx) var += (dataset.features.row(i).transpose() - st.mean).array().square().matrix();
    st.sd = (var / static_cast<double>(idx.size())).array().sqrt();
    return st;
}

LabeledDataset standardize(const LabeledDataset& dataset) {
    LabeledDataset out = dataset;
    const Eigen::RowVectorXd mean = dataset.stats.mean.transpose();
    const Eigen::RowVectorXd inv_sd =
        dataset.stats.sd.array().max(kSdFloor).inverse().matrix().transpose();
    out.features = ((dataset.features.rowwise() - mean).array().rowwise() * inv_sd.array()).matrix();
    out.stats = compute_train_stats(out);
    return out;
}

namespace {

std::string join_doubles(const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += format_double(v(i));
    }
    return s;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> out;
    if (text.empty()) return out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

} // namespace

void write_dataset(const LabeledDataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# version=1\n";
    out << "# selector=" << to_string(d.selector) << '\n';
    out << "# W=" << d.window << '\n';
    out << "# k=" << d.k << '\n';
    out << "# layout=time-major,channel-minor\n";
    out << "# class_set=" << join(d.class_set, ';') << '\n';
    out << "# split_seed=" << d.split_seed << '\n';
    out << "# stats_mean=" << join_doubles(d.stats.mean) << '\n';
    out << "# stats_sd=" << join_doubles(d.stats.sd) << '\n';
    out << "split,label,source_id,window_index";
    for (Eigen::Index f = 0; f < d.feature_count(); ++f) out << ",f_" << f;
    out << '\n';
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        out << to_string(d.splits[u]) << ',' << d.class_set[static_cast<std::size_t>(d.labels[u])]
            << ',' << d.source_ids[u] << ',' << d.window_indices[u];
        for (Eigen::Index f = 0; f < d.feature_count(); ++f)
            out << ',' << format_double(d.features(i, f));
        out << '\n';
    }
}

LabeledDataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::map<std::string, std::string> header;
    std::string line;
    std::size_t line_no = 0;
    bool saw_columns = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw DatasetParseError(line_no, "malformed header line");
            header[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        saw_columns = true;
        break;
    }
    if (header.empty()) throw DatasetParseError(std::max<std::size_t>(line_no, 1), "missing header");
    for (const char* key : {"version", "selector", "W", "k", "class_set", "split_seed",
                            "stats_mean", "stats_sd"})
        if (!header.count(key))
            throw DatasetParseError(line_no, std::string("missing header key ") + key);
    if (header["version"] != "1") throw DatasetParseError(1, "unsupported version");

    LabeledDataset d;
    try {
        d.selector = selector_from_string(header["selector"]);
        d.window = static_cast<int>(parse_int(header["W"]));
        d.k = static_cast<int>(parse_int(header["k"]));
        d.split_seed = std::stoull(header["split_seed"]);
    } catch (const std::exception& e) {
        throw DatasetParseError(line_no, std::string("malformed header: ") + e.what());
    }
    if (d.k != channels_per_step(d.selector))
        throw DatasetParseError(line_no, "k does not match selector");
    d.class_set = split_on(header["class_set"], ';');
    std::map<std::string, int> class_index;
    for (std::size_t c = 0; c < d.class_set.size(); ++c)
        class_index[d.class_set[c]] = static_cast<int>(c);

    const Eigen::Index n_features = static_cast<Eigen::Index>(d.window) * d.k;
    auto parse_vec = [&](const std::string& key) {
        const auto parts = split_on(header[key], ';');
        if (static_cast<Eigen::Index>(parts.size()) != n_features)
            throw DatasetParseError(line_no, key + " length does not match W*k");
        Eigen::VectorXd v(n_features);
        for (Eigen::Index i = 0; i < n_features; ++i)
            v(i) = parse_double(parts[static_cast<std::size_t>(i)]);
        return v;
    };
    d.stats.mean = parse_vec("stats_mean");
    d.stats.sd = parse_vec("stats_sd");
    if (!saw_columns) throw DatasetParseError(line_no, "missing column header");

    std::vector<Eigen::VectorXd> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (static_cast<Eigen::Index>(cells.size()) != 4 + n_features)
            throw DatasetParseError(line_no, "feature count does not match W*k");
        try {
            d.splits.push_back(split_from_string(std::string(cells[0])));
            const std::string label(cells[1]);
            const auto it = class_index.find(label);
            if (it == class_index.end()) throw std::invalid_argument("unknown label " + label);
            d.labels.push_back(it->second);
            d.source_ids.emplace_back(cells[2]);
            d.window_indices.push_back(static_cast<int>(parse_int(cells[3])));
            Eigen::VectorXd f(n_features);
            for (Eigen::Index i = 0; i < n_features; ++i)
                f(i) = parse_double(cells[static_cast<std::size_t>(4 + i)]);
            rows.push_back(std::move(f));
        } catch (const DatasetParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw DatasetParseError(line_no, e.what());
        }
    }
    d.features.resize(static_cast<Eigen::Index>(rows.size()), n_features);
    for (std::size_t i = 0; i < rows.size(); ++i)
        d.features.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return d;
}

} // namespace whisker
