#include "regcore/cnn.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "regcore/evaluation.hpp"

namespace regcore {

void CnnConfig::validate() const {
    if (kernel < 1) throw CnnError("kernel size must be >= 1");
    if (filters < 1) throw CnnError("filter count must be >= 1");
    if (embedding_dim < 1) throw CnnError("embedding dimension must be >= 1");
    if (labels < 1) throw CnnError("label count must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw CnnError("threshold must lie in (0, 1)");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw CnnError("learning rate must be finite and >= 0");
    }
    if (batch_size < 1) throw CnnError("batch size must be >= 1");
    if (max_epochs < 1) throw CnnError("max epochs must be >= 1");
    if (max_len < 1) throw CnnError("max_len must be >= 1");
}

CnnParams CnnParams::zeros(std::size_t filters, std::size_t kernel, std::size_t dim, std::size_t labels) {
    CnnParams p;
    p.filters = filters;
    p.kernel = kernel;
    p.dim = dim;
    p.labels = labels;
    p.conv_w.assign(filters * kernel * dim, 0.0);
    p.conv_b.assign(filters, 0.0);
    p.out_w.assign(labels * filters, 0.0);
    p.out_b.assign(labels, 0.0);
    return p;
}

CnnParams CnnParams::zeros(const CnnConfig& c) { return zeros(c.filters, c.kernel, c.embedding_dim, c.labels); }

CnnParams CnnParams::uniform(const CnnConfig& c, Rng& rng, double scale) {
    auto p = zeros(c);
    for (auto* t : p.tensors()) {
        for (auto& v : *t) v = uniform_real(rng, -scale, scale);
    }
    return p;
}

bool CnnParams::all_finite() const {
    for (const auto* t : tensors()) {
        for (double v : *t) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

Matrix targets_from(const std::vector<LabelSet>& labels) {
    Matrix t = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(kNumRegisters));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (Register r : labels[i].members()) t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index_of(r))) = 1.0;
    }
    return t;
}

std::size_t effective_length(const EncodedDoc& doc) {
    std::size_t n = doc.indices.size();
    while (n > 0 && doc.indices[n - 1] == kPadIndex) --n;
    return n;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedMap = Eigen::Map<const RowMajor, 0, Eigen::OuterStride<>>;

void check_compatible(const CnnParams& params, const EmbeddingTable& table) {
    if (params.dim != table.dim()) {
        throw CnnError("model expects " + std::to_string(params.dim) + "-d embeddings, table has " +
                       std::to_string(table.dim()));
    }
}

double sigmoid(double z) {
    double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    // Keep the output strictly inside (0, 1) for saturated logits.
    return std::clamp(p, 0x1.0p-1000, 1.0 - 0x1.0p-53);
}

std::vector<double> output_probabilities(const CnnParams& params, const std::vector<double>& h) {
    std::vector<double> p(params.labels);
    for (std::size_t l = 0; l < params.labels; ++l) {
        double z = params.out_b[l];
        for (std::size_t f = 0; f < params.filters; ++f) z += params.u(l, f) * h[f];
        p[l] = sigmoid(z);
    }
    return p;
}

}  // namespace

PooledFeatures pooled_features(const CnnParams& params, const EncodedDoc& doc, const EmbeddingTable& table) {
    check_compatible(params, table);
    const std::size_t k = params.kernel;
    const std::size_t d = params.dim;
    const std::size_t nf = params.filters;
    const std::size_t real = effective_length(doc);
    const std::size_t rows = std::max(real, k);
    const std::size_t windows = rows - k + 1;

    RowMajor emb = RowMajor::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    for (std::size_t t = 0; t < real; ++t) {
        auto idx = doc.indices[t];
        if (idx >= table.rows()) {
            throw CnnError("token index " + std::to_string(idx) + " outside the embedding table (" +
                           std::to_string(table.rows()) + " rows)");
        }
        auto vec = table.row(idx);
        for (std::size_t e = 0; e < d; ++e) emb(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(e)) = vec[e];
    }

    RowMajor pre(static_cast<Eigen::Index>(windows), static_cast<Eigen::Index>(nf));
    Eigen::Map<const Eigen::RowVectorXd> bias(params.conv_b.data(), static_cast<Eigen::Index>(nf));
    pre.rowwise() = bias;
    for (std::size_t j = 0; j < k; ++j) {
        StridedMap wj(params.conv_w.data() + j * d, static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(d),
                      Eigen::OuterStride<>(static_cast<Eigen::Index>(k * d)));
        pre.noalias() += emb.middleRows(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(windows)) * wj.transpose();
    }

    PooledFeatures out;
    out.value.resize(nf);
    out.argmax.resize(nf);
    out.preactivation.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        std::size_t best = 0;
        double best_v = pre(0, static_cast<Eigen::Index>(f));
        for (std::size_t t = 1; t < windows; ++t) {
            double v = pre(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f));
            if (std::isnan(best_v)) break;
            if (v > best_v || std::isnan(v)) {
                best_v = v;
                best = t;
            }
        }
        out.argmax[f] = best;
        out.preactivation[f] = best_v;
        // NaN passes through so that corrupt inputs surface as a non-finite loss.
        out.value[f] = best_v > 0.0 || std::isnan(best_v) ? best_v : 0.0;
    }
    return out;
}

Matrix forward(const CnnParams& params, std::span<const EncodedDoc> batch, const EmbeddingTable& table) {
    Matrix probs(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(params.labels));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto feats = pooled_features(params, batch[i], table);
        auto p = output_probabilities(params, feats.value);
        for (std::size_t l = 0; l < params.labels; ++l) probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = p[l];
    }
    return probs;
}

double bce_loss(const Matrix& probabilities, const Matrix& targets) {
    if (probabilities.rows() != targets.rows() || probabilities.cols() != targets.cols()) {
        throw CnnError("bce_loss: probability and target shapes differ");
    }
    if (probabilities.size() == 0) return 0.0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
        for (Eigen::Index l = 0; l < probabilities.cols(); ++l) {
            double p = std::clamp(probabilities(i, l), kBceEpsilon, 1.0 - kBceEpsilon);
            double t = targets(i, l);
            sum -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
        }
    }
    return sum / static_cast<double>(probabilities.size());
}

GradientResult gradients(const CnnParams& params, std::span<const EncodedDoc> batch, const Matrix& targets,
                         const EmbeddingTable& table) {
    const auto B = batch.size();
    const std::size_t L = params.labels;
    if (static_cast<std::size_t>(targets.rows()) != B || static_cast<std::size_t>(targets.cols()) != L) {
        throw CnnError("gradients: targets must be " + std::to_string(B) + " x " + std::to_string(L));
    }
    GradientResult res;
    res.grad = CnnParams::zeros(params.filters, params.kernel, params.dim, L);
    res.probabilities = Matrix(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(L));
    if (B == 0) return res;

    const double scale = 1.0 / static_cast<double>(B * L);
    const std::size_t k = params.kernel;
    const std::size_t d = params.dim;
    auto& g = res.grad;
    std::vector<double> dz(L);
    std::vector<double> dh(params.filters);

    for (std::size_t i = 0; i < B; ++i) {
        const auto& doc = batch[i];
        auto feats = pooled_features(params, doc, table);
        auto p = output_probabilities(params, feats.value);
        for (std::size_t l = 0; l < L; ++l) {
            res.probabilities(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = p[l];
            double t = targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
            bool clamped = p[l] < kBceEpsilon || p[l] > 1.0 - kBceEpsilon;
            dz[l] = clamped ? 0.0 : (p[l] - t) * scale;
        }
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t l = 0; l < L; ++l) {
            g.out_b[l] += dz[l];
            for (std::size_t f = 0; f < params.filters; ++f) {
                g.u(l, f) += dz[l] * feats.value[f];
                dh[f] += dz[l] * params.u(l, f);
            }
        }
        const std::size_t real = effective_length(doc);
        for (std::size_t f = 0; f < params.filters; ++f) {
            if (!(feats.preactivation[f] > 0.0)) continue;
            g.conv_b[f] += dh[f];
            for (std::size_t j = 0; j < k; ++j) {
                std::size_t pos = feats.argmax[f] + j;
                if (pos >= real) continue;  // padding row, zero input
                auto x = table.row(doc.indices[pos]);
                double* gw = &g.conv_w[(f * k + j) * d];
                for (std::size_t e = 0; e < d; ++e) gw[e] += dh[f] * x[e];
            }
        }
    }
    res.loss = bce_loss(res.probabilities, targets);
    return res;
}

std::vector<LabelSet> threshold_predictions(const Matrix& probabilities, double threshold) {
    std::vector<LabelSet> out(static_cast<std::size_t>(probabilities.rows()));
    const auto cols = std::min<Eigen::Index>(probabilities.cols(), static_cast<Eigen::Index>(kNumRegisters));
    for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
        for (Eigen::Index l = 0; l < cols; ++l) {
            if (probabilities(i, l) >= threshold) out[static_cast<std::size_t>(i)].insert(static_cast<Register>(l));
        }
    }
    return out;
}

std::vector<LabelSet> predict(const CnnParams& params, std::span<const EncodedDoc> docs,
                              const EmbeddingTable& table, double threshold, std::size_t batch_size) {
    std::vector<LabelSet> out;
    out.reserve(docs.size());
    batch_size = std::max<std::size_t>(batch_size, 1);
    for (std::size_t start = 0; start < docs.size(); start += batch_size) {
        auto n = std::min(batch_size, docs.size() - start);
        auto labels = threshold_predictions(forward(params, docs.subspan(start, n), table), threshold);
        out.insert(out.end(), labels.begin(), labels.end());
    }
    return out;
}

AdamOptimizer::AdamOptimizer(const CnnParams& shape, double learning_rate)
    : lr_(learning_rate),
      m_(CnnParams::zeros(shape.filters, shape.kernel, shape.dim, shape.labels)),
      v_(CnnParams::zeros(shape.filters, shape.kernel, shape.dim, shape.labels)) {}

void AdamOptimizer::step(CnnParams& params, const CnnParams& grad) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    auto p = params.tensors();
    auto g = grad.tensors();
    auto m = m_.tensors();
    auto v = v_.tensors();
    for (std::size_t k = 0; k < p.size(); ++k) {
        auto& pt = *p[k];
        const auto& gt = *g[k];
        auto& mt = *m[k];
        auto& vt = *v[k];
        for (std::size_t i = 0; i < pt.size(); ++i) {
            mt[i] = beta1 * mt[i] + (1.0 - beta1) * gt[i];
            vt[i] = beta2 * vt[i] + (1.0 - beta2) * gt[i] * gt[i];
            double mhat = mt[i] / c1;
            double vhat = vt[i] / c2;
            pt[i] -= lr_ * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

TrainResult train(const CnnConfig& config, const LabeledData& train_set, const LabeledData& dev_set,
                  const EmbeddingTable& table) {
    config.validate();
    if (config.labels != kNumRegisters) throw CnnError("register training needs 8 output labels");
    if (config.embedding_dim != table.dim()) {
        throw CnnError("config embedding_dim " + std::to_string(config.embedding_dim) + " != table dim " +
                       std::to_string(table.dim()));
    }
    if (train_set.size() == 0 || dev_set.size() == 0) throw CnnError("train and dev sets must be nonempty");
    if (train_set.docs.size() != train_set.labels.size() || dev_set.docs.size() != dev_set.labels.size()) {
        throw CnnError("documents and labels differ in count");
    }

    const auto started = std::chrono::steady_clock::now();
    Rng rng(config.seed);
    TrainResult result;
    CnnParams params = CnnParams::uniform(config, rng);
    AdamOptimizer adam(params, config.learning_rate);
    result.params = params;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<EncodedDoc> batch_docs;
    std::vector<LabelSet> batch_labels;
    double best_f1 = -1.0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle(order, rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0, batch_no = 1; start < order.size(); start += config.batch_size, ++batch_no) {
            auto n = std::min(config.batch_size, order.size() - start);
            batch_docs.clear();
            batch_labels.clear();
            for (std::size_t b = 0; b < n; ++b) {
                batch_docs.push_back(train_set.docs[order[start + b]]);
                batch_labels.push_back(train_set.labels[order[start + b]]);
            }
            auto g = gradients(params, batch_docs, targets_from(batch_labels), table);
            if (!std::isfinite(g.loss) || !g.grad.all_finite()) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << ", batch " << batch_no << " (loss " << g.loss
                    << ", lr " << config.learning_rate << ", kernel " << config.kernel << ")";
                throw TrainingError(msg.str());
            }
            loss_sum += g.loss * static_cast<double>(n);
            adam.step(params, g.grad);
        }
        result.history.train_loss.push_back(loss_sum / static_cast<double>(train_set.size()));

        auto preds = predict(params, dev_set.docs, table, config.threshold);
        double f1 = micro_f1(dev_set.labels, preds);
        result.history.dev_f1.push_back(f1);
        if (f1 > best_f1) {
            best_f1 = f1;
            result.history.chosen_epoch = epoch;
            result.params = params;
        } else if (epoch - result.history.chosen_epoch >= config.patience) {
            break;
        }
    }
    result.history.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

namespace {

constexpr const char* kMagic = "regcore-cnn-checkpoint";

void write_double(std::ostream& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

double read_double(std::string_view s, const std::string& what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw CnnError("checkpoint: bad number '" + std::string(s) + "' in " + what);
    }
    return v;
}

std::size_t read_size(const std::string& s, const std::string& what) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw CnnError("checkpoint: bad integer '" + s + "' for " + what);
    }
    return v;
}

}  // namespace

void save_checkpoint(std::ostream& out, const CnnConfig& c, const CnnParams& p) {
    out << kMagic << '\n' << "version " << Checkpoint::kVersion << '\n' << "labels";
    for (Register r : kAllRegisters) out << ' ' << register_code(r);
    out << '\n'
        << "kernel " << c.kernel << '\n'
        << "filters " << c.filters << '\n'
        << "embedding_dim " << c.embedding_dim << '\n'
        << "label_count " << c.labels << '\n'
        << "learning_rate ";
    write_double(out, c.learning_rate);
    out << "\nthreshold ";
    write_double(out, c.threshold);
    out << '\n'
        << "batch_size " << c.batch_size << '\n'
        << "max_epochs " << c.max_epochs << '\n'
        << "patience " << c.patience << '\n'
        << "seed " << c.seed << '\n'
        << "max_len " << c.max_len << '\n';
    auto tensors = p.tensors();
    for (std::size_t k = 0; k < tensors.size(); ++k) {
        out << "tensor " << kTensorNames[k] << ' ' << tensors[k]->size() << '\n';
        for (std::size_t i = 0; i < tensors[k]->size(); ++i) {
            if (i) out << ' ';
            write_double(out, (*tensors[k])[i]);
        }
        out << '\n';
    }
    out << "end\n";
}

Checkpoint load_checkpoint(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw CnnError("not a regcore CNN checkpoint");
    Checkpoint ck;
    std::map<std::string, std::string> fields;
    std::map<std::string, std::vector<double>> tensors;
    bool ended = false;
    while (std::getline(in, line)) {
        if (line == "end") {
            ended = true;
            break;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "labels") {
            std::string code;
            while (ls >> code) ck.label_order.push_back(code);
        } else if (key == "tensor") {
            std::string name, count;
            ls >> name >> count;
            auto n = read_size(count, name);
            std::string values;
            std::getline(in, values);
            std::vector<double> data;
            data.reserve(n);
            std::string_view rest(values);
            while (!rest.empty()) {
                auto sp = rest.find(' ');
                auto tok = rest.substr(0, sp);
                if (!tok.empty()) data.push_back(read_double(tok, name));
                if (sp == std::string_view::npos) break;
                rest.remove_prefix(sp + 1);
            }
            if (data.size() != n) throw CnnError("checkpoint: tensor " + name + " has wrong length");
            tensors[name] = std::move(data);
        } else {
            std::string value;
            ls >> value;
            fields[key] = value;
        }
    }
    if (!ended) throw CnnError("checkpoint: truncated file");
    auto get = [&](const std::string& k) -> const std::string& {
        auto it = fields.find(k);
        if (it == fields.end()) throw CnnError("checkpoint: missing field " + k);
        return it->second;
    };
    if (read_size(get("version"), "version") != static_cast<std::size_t>(Checkpoint::kVersion)) {
        throw CnnError("checkpoint: unsupported version " + get("version"));
    }
    std::vector<std::string> canonical;
    for (Register r : kAllRegisters) canonical.emplace_back(register_code(r));
    if (ck.label_order != canonical) throw CnnError("checkpoint: label order differs from NA IN OP ID HI IP LY SP");

    auto& c = ck.config;
    c.kernel = read_size(get("kernel"), "kernel");
    c.filters = read_size(get("filters"), "filters");
    c.embedding_dim = read_size(get("embedding_dim"), "embedding_dim");
    c.labels = read_size(get("label_count"), "label_count");
    c.learning_rate = read_double(get("learning_rate"), "learning_rate");
    c.threshold = read_double(get("threshold"), "threshold");
    c.batch_size = read_size(get("batch_size"), "batch_size");
    c.max_epochs = read_size(get("max_epochs"), "max_epochs");
    c.patience = read_size(get("patience"), "patience");
    c.seed = read_size(get("seed"), "seed");
    c.max_len = read_size(get("max_len"), "max_len");
    c.validate();

    ck.params = CnnParams::zeros(c);
    auto targets = ck.params.tensors();
    for (std::size_t k = 0; k < targets.size(); ++k) {
        auto it = tensors.find(kTensorNames[k]);
        if (it == tensors.end()) throw CnnError(std::string("checkpoint: missing tensor ") + kTensorNames[k]);
        if (it->second.size() != targets[k]->size()) {
            throw CnnError(std::string("checkpoint: tensor ") + kTensorNames[k] + " does not match the config shape");
        }
        *targets[k] = it->second;
    }
    return ck;
}

void save_checkpoint_file(const std::string& path, const CnnConfig& config, const CnnParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CnnError("cannot write checkpoint " + path);
    save_checkpoint(out, config, params);
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CnnError("cannot open checkpoint " + path);
    return load_checkpoint(in);
}

}  // namespace regcore
