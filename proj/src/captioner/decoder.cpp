#include "observer/captioner/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "observer/error.hpp"

namespace observer::captioner {

namespace {

// y = W x (+ b), W is rows x cols row-major.
template <typename T>
void matvec(const std::vector<T>& w, std::size_t rows, std::size_t cols, std::span<const T> x,
            std::span<T> y)
{
    for (std::size_t r = 0; r < rows; ++r) {
        const T* wr = w.data() + r * cols;
        T acc = 0;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] += acc;
    }
}

// y += W^T g
template <typename T>
void matvec_transposed(const std::vector<T>& w, std::size_t rows, std::size_t cols,
                       std::span<const T> g, std::span<T> y)
{
    for (std::size_t r = 0; r < rows; ++r) {
        const T* wr = w.data() + r * cols;
        const T gr = g[r];
        if (gr == T(0)) continue;
        for (std::size_t c = 0; c < cols; ++c) y[c] += wr[c] * gr;
    }
}

// G += g x^T
template <typename T>
void outer_add(std::vector<T>& grad, std::size_t rows, std::size_t cols, std::span<const T> g,
               std::span<const T> x)
{
    for (std::size_t r = 0; r < rows; ++r) {
        T* gr = grad.data() + r * cols;
        const T s = g[r];
        if (s == T(0)) continue;
        for (std::size_t c = 0; c < cols; ++c) gr[c] += s * x[c];
    }
}

template <typename T>
T sigmoid(T x)
{
    return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
std::span<const T> cspan(const std::vector<T>& v)
{
    return {v.data(), v.size()};
}

}  // namespace

template <typename T>
AttentionOutput<T> attend(std::span<const T> scores, const FeatureGridT<T>& grid)
{
    if (scores.size() != grid.locations) {
        throw ValidationError("attend: score count does not match grid locations");
    }
    AttentionOutput<T> out;
    out.weights.resize(grid.locations);
    out.context.assign(grid.dim, T(0));
    const T peak = *std::max_element(scores.begin(), scores.end());
    T total = 0;
    for (std::size_t l = 0; l < grid.locations; ++l) {
        out.weights[l] = std::exp(scores[l] - peak);
        total += out.weights[l];
    }
    for (auto& w : out.weights) w /= total;
    for (std::size_t l = 0; l < grid.locations; ++l) {
        const auto row = grid.row(l);
        const T a = out.weights[l];
        for (std::size_t d = 0; d < grid.dim; ++d) out.context[d] += a * row[d];
    }
    return out;
}

template <typename T>
struct AttentionDecoder<T>::StepCache {
    corpus::TokenId input = 0;
    corpus::TokenId target = 0;
    std::vector<T> h_prev;
    std::vector<T> c_prev;
    std::vector<T> u;  // L x A, tanh(keys + W_h h_prev)
    std::vector<T> alpha;
    std::vector<T> x;      // [embedding; context]
    std::vector<T> gates;  // i, f, g, o after activation
    std::vector<T> c;
    std::vector<T> tanh_c;
    std::vector<T> h;
    std::vector<T> probs;
};

template <typename T>
AttentionDecoder<T>::AttentionDecoder(const DecoderDims& dims) : dims_(dims)
{
    if (dims.feature_dim == 0 || dims.hidden == 0 || dims.embed == 0 || dims.attention == 0 ||
        dims.vocab <= static_cast<std::size_t>(corpus::special::kCount)) {
        throw ValidationError("decoder: all dimensions must be positive and vocab > 4");
    }
    const auto d = dims.feature_dim;
    const auto h = dims.hidden;
    const auto e = dims.embed;
    const auto a = dims.attention;
    const auto v = dims.vocab;
    embedding_ = Param<T>("decoder.embedding", v * e);
    att_feat_w_ = Param<T>("decoder.attention.feature_weight", a * d);
    att_feat_b_ = Param<T>("decoder.attention.feature_bias", a);
    att_hid_w_ = Param<T>("decoder.attention.hidden_weight", a * h);
    att_v_ = Param<T>("decoder.attention.score_vector", a);
    init_h_w_ = Param<T>("decoder.init_hidden.weight", h * d);
    init_h_b_ = Param<T>("decoder.init_hidden.bias", h);
    init_c_w_ = Param<T>("decoder.init_cell.weight", h * d);
    init_c_b_ = Param<T>("decoder.init_cell.bias", h);
    lstm_x_w_ = Param<T>("decoder.lstm.input_weight", 4 * h * (e + d));
    lstm_h_w_ = Param<T>("decoder.lstm.hidden_weight", 4 * h * h);
    lstm_b_ = Param<T>("decoder.lstm.bias", 4 * h);
    out_w_ = Param<T>("decoder.output.weight", v * h);
    out_b_ = Param<T>("decoder.output.bias", v);
}

template <typename T>
void AttentionDecoder<T>::initialize(std::mt19937_64& rng)
{
    const auto d = static_cast<double>(dims_.feature_dim);
    const auto h = static_cast<double>(dims_.hidden);
    const auto a = static_cast<double>(dims_.attention);
    const auto e = static_cast<double>(dims_.embed);
    embedding_.init_uniform(rng, 0.1);
    att_feat_w_.init_uniform(rng, std::sqrt(1.0 / d));
    att_hid_w_.init_uniform(rng, std::sqrt(1.0 / h));
    att_v_.init_uniform(rng, std::sqrt(1.0 / a));
    init_h_w_.init_uniform(rng, std::sqrt(1.0 / d));
    init_c_w_.init_uniform(rng, std::sqrt(1.0 / d));
    lstm_x_w_.init_uniform(rng, std::sqrt(1.0 / (e + d)));
    lstm_h_w_.init_uniform(rng, std::sqrt(1.0 / h));
    out_w_.init_uniform(rng, std::sqrt(1.0 / h));
    for (Param<T>* p : {&att_feat_b_, &init_h_b_, &init_c_b_, &lstm_b_, &out_b_}) {
        std::fill(p->value.begin(), p->value.end(), T(0));
    }
    // Forget-gate bias of one.
    std::fill(lstm_b_.value.begin() + static_cast<long>(dims_.hidden),
              lstm_b_.value.begin() + static_cast<long>(2 * dims_.hidden), T(1));
}

template <typename T>
AttentionKeys<T> AttentionDecoder<T>::project_keys(const FeatureGridT<T>& grid) const
{
    if (grid.dim != dims_.feature_dim) {
        throw ValidationError("decoder: grid feature dimension " + std::to_string(grid.dim) +
                              " does not match model dimension " +
                              std::to_string(dims_.feature_dim));
    }
    if (grid.locations == 0) throw ValidationError("decoder: grid has no locations");
    AttentionKeys<T> keys;
    keys.locations = grid.locations;
    keys.values.resize(grid.locations * dims_.attention);
    for (std::size_t l = 0; l < grid.locations; ++l) {
        std::span<T> out(keys.values.data() + l * dims_.attention, dims_.attention);
        std::copy(att_feat_b_.value.begin(), att_feat_b_.value.end(), out.begin());
        matvec(att_feat_w_.value, dims_.attention, dims_.feature_dim, grid.row(l), out);
    }
    return keys;
}

template <typename T>
std::vector<T> AttentionDecoder<T>::alignment_scores(const AttentionKeys<T>& keys,
                                                     std::span<const T> hidden) const
{
    if (hidden.size() != dims_.hidden) {
        throw ValidationError("decoder: hidden state has dimension " +
                              std::to_string(hidden.size()) + ", expected " +
                              std::to_string(dims_.hidden));
    }
    const std::size_t a = dims_.attention;
    std::vector<T> query(a, T(0));
    matvec(att_hid_w_.value, a, dims_.hidden, hidden, std::span<T>(query));
    std::vector<T> scores(keys.locations, T(0));
    for (std::size_t l = 0; l < keys.locations; ++l) {
        const T* key = keys.values.data() + l * a;
        T acc = 0;
        for (std::size_t j = 0; j < a; ++j) acc += att_v_.value[j] * std::tanh(key[j] + query[j]);
        scores[l] = acc;
    }
    return scores;
}

template <typename T>
AttentionOutput<T> AttentionDecoder<T>::attention_step(std::span<const T> hidden,
                                                       const FeatureGridT<T>& grid) const
{
    const auto keys = project_keys(grid);
    const auto scores = alignment_scores(keys, hidden);
    return attend<T>(scores, grid);
}

template <typename T>
LstmState<T> AttentionDecoder<T>::initial_state(const FeatureGridT<T>& grid) const
{
    if (grid.dim != dims_.feature_dim) throw ValidationError("decoder: grid dimension mismatch");
    std::vector<T> mean(grid.dim, T(0));
    for (std::size_t l = 0; l < grid.locations; ++l) {
        const auto row = grid.row(l);
        for (std::size_t d = 0; d < grid.dim; ++d) mean[d] += row[d];
    }
    for (auto& m : mean) m /= static_cast<T>(grid.locations);
    LstmState<T> state;
    state.hidden = init_h_b_.value;
    state.cell = init_c_b_.value;
    matvec(init_h_w_.value, dims_.hidden, dims_.feature_dim, cspan(mean), std::span<T>(state.hidden));
    matvec(init_c_w_.value, dims_.hidden, dims_.feature_dim, cspan(mean), std::span<T>(state.cell));
    for (auto& v : state.hidden) v = std::tanh(v);
    for (auto& v : state.cell) v = std::tanh(v);
    return state;
}

template <typename T>
StepOutput<T> AttentionDecoder<T>::step(const FeatureGridT<T>& grid, const AttentionKeys<T>& keys,
                                        const LstmState<T>& state, corpus::TokenId input) const
{
    return forward_step(grid, keys, state, input, nullptr);
}

template <typename T>
StepOutput<T> AttentionDecoder<T>::forward_step(const FeatureGridT<T>& grid,
                                                const AttentionKeys<T>& keys,
                                                const LstmState<T>& state, corpus::TokenId input,
                                                StepCache* cache) const
{
    if (input < 0 || static_cast<std::size_t>(input) >= dims_.vocab) {
        throw ValidationError("decoder: token id out of range");
    }
    if (state.hidden.size() != dims_.hidden || state.cell.size() != dims_.hidden) {
        throw ValidationError("decoder: state dimension mismatch");
    }
    const std::size_t hsz = dims_.hidden;
    const std::size_t esz = dims_.embed;
    const std::size_t dsz = dims_.feature_dim;
    const std::size_t asz = dims_.attention;

    StepOutput<T> out;
    std::vector<T> query(asz, T(0));
    matvec(att_hid_w_.value, asz, hsz, cspan(state.hidden), std::span<T>(query));
    std::vector<T> u(keys.locations * asz);
    std::vector<T> scores(keys.locations, T(0));
    for (std::size_t l = 0; l < keys.locations; ++l) {
        T acc = 0;
        for (std::size_t j = 0; j < asz; ++j) {
            const T v = std::tanh(keys.values[l * asz + j] + query[j]);
            u[l * asz + j] = v;
            acc += att_v_.value[j] * v;
        }
        scores[l] = acc;
    }
    out.attention = attend<T>(scores, grid);

    std::vector<T> x(esz + dsz);
    std::copy_n(embedding_.value.begin() + static_cast<long>(static_cast<std::size_t>(input) * esz),
                esz, x.begin());
    std::copy(out.attention.context.begin(), out.attention.context.end(),
              x.begin() + static_cast<long>(esz));

    std::vector<T> gates = lstm_b_.value;
    matvec(lstm_x_w_.value, 4 * hsz, esz + dsz, cspan(x), std::span<T>(gates));
    matvec(lstm_h_w_.value, 4 * hsz, hsz, cspan(state.hidden), std::span<T>(gates));
    for (std::size_t j = 0; j < hsz; ++j) {
        gates[j] = sigmoid(gates[j]);
        gates[hsz + j] = sigmoid(gates[hsz + j]);
        gates[2 * hsz + j] = std::tanh(gates[2 * hsz + j]);
        gates[3 * hsz + j] = sigmoid(gates[3 * hsz + j]);
    }

    out.state.hidden.resize(hsz);
    out.state.cell.resize(hsz);
    std::vector<T> tanh_c(hsz);
    for (std::size_t j = 0; j < hsz; ++j) {
        out.state.cell[j] = gates[hsz + j] * state.cell[j] + gates[j] * gates[2 * hsz + j];
        tanh_c[j] = std::tanh(out.state.cell[j]);
        out.state.hidden[j] = gates[3 * hsz + j] * tanh_c[j];
    }
    out.logits = out_b_.value;
    matvec(out_w_.value, dims_.vocab, hsz, cspan(out.state.hidden), std::span<T>(out.logits));

    if (cache) {
        cache->input = input;
        cache->h_prev = state.hidden;
        cache->c_prev = state.cell;
        cache->u = std::move(u);
        cache->alpha = out.attention.weights;
        cache->x = std::move(x);
        cache->gates = std::move(gates);
        cache->c = out.state.cell;
        cache->tanh_c = std::move(tanh_c);
        cache->h = out.state.hidden;
    }
    return out;
}

template <typename T>
T AttentionDecoder<T>::run_sequence(const FeatureGridT<T>& grid,
                                    std::span<const corpus::TokenId> tokens,
                                    std::vector<StepCache>* caches, LstmState<T>* initial) const
{
    if (tokens.size() < 2) throw ValidationError("decoder: sequence needs at least two tokens");
    const auto keys = project_keys(grid);
    LstmState<T> state = initial_state(grid);
    if (initial) *initial = state;
    const std::size_t steps = tokens.size() - 1;
    if (caches) caches->resize(steps);
    T total = 0;
    for (std::size_t t = 0; t < steps; ++t) {
        const corpus::TokenId target = tokens[t + 1];
        if (target < 0 || static_cast<std::size_t>(target) >= dims_.vocab) {
            throw ValidationError("decoder: target id out of range");
        }
        StepCache* sc = caches ? &(*caches)[t] : nullptr;
        StepOutput<T> out = forward_step(grid, keys, state, tokens[t], sc);
        const T peak = *std::max_element(out.logits.begin(), out.logits.end());
        T z = 0;
        for (const T v : out.logits) z += std::exp(v - peak);
        const T log_z = peak + std::log(z);
        total += log_z - out.logits[static_cast<std::size_t>(target)];
        if (sc) {
            sc->target = target;
            sc->probs.resize(dims_.vocab);
            for (std::size_t v = 0; v < dims_.vocab; ++v) {
                sc->probs[v] = std::exp(out.logits[v] - log_z);
            }
        }
        state = std::move(out.state);
    }
    return total / static_cast<T>(steps);
}

template <typename T>
T AttentionDecoder<T>::loss(const FeatureGridT<T>& grid,
                            std::span<const corpus::TokenId> tokens) const
{
    return run_sequence(grid, tokens, nullptr, nullptr);
}

template <typename T>
T AttentionDecoder<T>::loss_and_backward(const FeatureGridT<T>& grid,
                                         std::span<const corpus::TokenId> tokens,
                                         FeatureGridT<T>* grad_grid)
{
    if (!grad_grid) return loss(grid, tokens);
    std::vector<StepCache> caches;
    LstmState<T> initial;
    const T value = run_sequence(grid, tokens, &caches, &initial);

    const std::size_t hsz = dims_.hidden;
    const std::size_t esz = dims_.embed;
    const std::size_t dsz = dims_.feature_dim;
    const std::size_t asz = dims_.attention;
    const std::size_t lsz = grid.locations;
    const T scale = T(1) / static_cast<T>(caches.size());

    *grad_grid = FeatureGridT<T>(lsz, dsz);
    std::vector<T> grad_keys(lsz * asz, T(0));
    std::vector<T> dh_next(hsz, T(0));
    std::vector<T> dc_next(hsz, T(0));

    for (std::size_t t = caches.size(); t-- > 0;) {
        const StepCache& sc = caches[t];

        // Output projection.
        std::vector<T> dlogits = sc.probs;
        dlogits[static_cast<std::size_t>(sc.target)] -= T(1);
        for (auto& v : dlogits) v *= scale;
        outer_add(out_w_.grad, dims_.vocab, hsz, cspan(dlogits), cspan(sc.h));
        for (std::size_t v = 0; v < dims_.vocab; ++v) out_b_.grad[v] += dlogits[v];
        std::vector<T> dh = dh_next;
        matvec_transposed(out_w_.value, dims_.vocab, hsz, cspan(dlogits), std::span<T>(dh));

        // LSTM cell.
        std::vector<T> dgates(4 * hsz);
        std::vector<T> dc_prev(hsz);
        for (std::size_t j = 0; j < hsz; ++j) {
            const T i = sc.gates[j];
            const T f = sc.gates[hsz + j];
            const T g = sc.gates[2 * hsz + j];
            const T o = sc.gates[3 * hsz + j];
            const T tc = sc.tanh_c[j];
            const T dc = dc_next[j] + dh[j] * o * (T(1) - tc * tc);
            dgates[j] = dc * g * i * (T(1) - i);
            dgates[hsz + j] = dc * sc.c_prev[j] * f * (T(1) - f);
            dgates[2 * hsz + j] = dc * i * (T(1) - g * g);
            dgates[3 * hsz + j] = dh[j] * tc * o * (T(1) - o);
            dc_prev[j] = dc * f;
        }
        outer_add(lstm_x_w_.grad, 4 * hsz, esz + dsz, cspan(dgates), cspan(sc.x));
        outer_add(lstm_h_w_.grad, 4 * hsz, hsz, cspan(dgates), cspan(sc.h_prev));
        for (std::size_t j = 0; j < 4 * hsz; ++j) lstm_b_.grad[j] += dgates[j];
        std::vector<T> dx(esz + dsz, T(0));
        matvec_transposed(lstm_x_w_.value, 4 * hsz, esz + dsz, cspan(dgates), std::span<T>(dx));
        std::vector<T> dh_prev(hsz, T(0));
        matvec_transposed(lstm_h_w_.value, 4 * hsz, hsz, cspan(dgates), std::span<T>(dh_prev));

        T* emb_grad = embedding_.grad.data() + static_cast<std::size_t>(sc.input) * esz;
        for (std::size_t j = 0; j < esz; ++j) emb_grad[j] += dx[j];
        const std::span<const T> dcontext(dx.data() + esz, dsz);

        // Attention: context = sum_l alpha_l f_l.
        std::vector<T> dalpha(lsz, T(0));
        T weighted = 0;
        for (std::size_t l = 0; l < lsz; ++l) {
            const auto row = grid.row(l);
            auto grow = grad_grid->row(l);
            T acc = 0;
            for (std::size_t d = 0; d < dsz; ++d) {
                acc += dcontext[d] * row[d];
                grow[d] += sc.alpha[l] * dcontext[d];
            }
            dalpha[l] = acc;
            weighted += sc.alpha[l] * acc;
        }
        std::vector<T> dquery(asz, T(0));
        for (std::size_t l = 0; l < lsz; ++l) {
            const T de = sc.alpha[l] * (dalpha[l] - weighted);
            if (de == T(0)) continue;
            const T* u = sc.u.data() + l * asz;
            T* gk = grad_keys.data() + l * asz;
            for (std::size_t j = 0; j < asz; ++j) {
                att_v_.grad[j] += de * u[j];
                const T dpre = de * att_v_.value[j] * (T(1) - u[j] * u[j]);
                gk[j] += dpre;
                dquery[j] += dpre;
            }
        }
        outer_add(att_hid_w_.grad, asz, hsz, cspan(dquery), cspan(sc.h_prev));
        matvec_transposed(att_hid_w_.value, asz, hsz, cspan(dquery), std::span<T>(dh_prev));

        dh_next = std::move(dh_prev);
        dc_next = std::move(dc_prev);
    }

    // Keys = W_f f_l + b.
    for (std::size_t l = 0; l < lsz; ++l) {
        const std::span<const T> gk(grad_keys.data() + l * asz, asz);
        outer_add(att_feat_w_.grad, asz, dsz, gk, grid.row(l));
        for (std::size_t j = 0; j < asz; ++j) att_feat_b_.grad[j] += gk[j];
        matvec_transposed(att_feat_w_.value, asz, dsz, gk, grad_grid->row(l));
    }

    // Initial state from the mean feature.
    std::vector<T> mean(dsz, T(0));
    for (std::size_t l = 0; l < lsz; ++l) {
        const auto row = grid.row(l);
        for (std::size_t d = 0; d < dsz; ++d) mean[d] += row[d];
    }
    for (auto& m : mean) m /= static_cast<T>(lsz);
    std::vector<T> dmean(dsz, T(0));
    std::vector<T> dpre_h(hsz);
    std::vector<T> dpre_c(hsz);
    for (std::size_t j = 0; j < hsz; ++j) {
        dpre_h[j] = dh_next[j] * (T(1) - initial.hidden[j] * initial.hidden[j]);
        dpre_c[j] = dc_next[j] * (T(1) - initial.cell[j] * initial.cell[j]);
        init_h_b_.grad[j] += dpre_h[j];
        init_c_b_.grad[j] += dpre_c[j];
    }
    outer_add(init_h_w_.grad, hsz, dsz, cspan(dpre_h), cspan(mean));
    outer_add(init_c_w_.grad, hsz, dsz, cspan(dpre_c), cspan(mean));
    matvec_transposed(init_h_w_.value, hsz, dsz, cspan(dpre_h), std::span<T>(dmean));
    matvec_transposed(init_c_w_.value, hsz, dsz, cspan(dpre_c), std::span<T>(dmean));
    for (std::size_t l = 0; l < lsz; ++l) {
        auto grow = grad_grid->row(l);
        for (std::size_t d = 0; d < dsz; ++d) grow[d] += dmean[d] / static_cast<T>(lsz);
    }
    return value;
}

template <typename T>
void AttentionDecoder<T>::for_each_param(const std::function<void(Param<T>&)>& fn)
{
    for (Param<T>* p : {&embedding_, &att_feat_w_, &att_feat_b_, &att_hid_w_, &att_v_, &init_h_w_,
                        &init_h_b_, &init_c_w_, &init_c_b_, &lstm_x_w_, &lstm_h_w_, &lstm_b_,
                        &out_w_, &out_b_}) {
        fn(*p);
    }
}

template <typename T>
void AttentionDecoder<T>::for_each_param(const std::function<void(const Param<T>&)>& fn) const
{
    const_cast<AttentionDecoder*>(this)->for_each_param(
        [&](Param<T>& p) { fn(static_cast<const Param<T>&>(p)); });
}

template AttentionOutput<float> attend<float>(std::span<const float>, const FeatureGridT<float>&);
template AttentionOutput<double> attend<double>(std::span<const double>,
                                                const FeatureGridT<double>&);
template class AttentionDecoder<float>;
template class AttentionDecoder<double>;

}  // namespace observer::captioner
