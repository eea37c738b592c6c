#include "nsrtplan/nn.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace nsrtplan {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

Mlp::Mlp(std::vector<int> dims, Rng& rng) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output dims");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        w_off_.push_back(total);
        total += static_cast<std::size_t>(dims_[l + 1]) * dims_[l];
        b_off_.push_back(total);
        total += dims_[l + 1];
    }
    theta_.resize(total);
    grad_.assign(total, 0.0);
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
        const std::size_t n = static_cast<std::size_t>(dims_[l + 1]) * dims_[l] + dims_[l + 1];
        for (std::size_t i = 0; i < n; ++i) {
            theta_[w_off_[l] + i] = rng.uniform(-bound, bound);
        }
    }
}

void Mlp::forward(const double* X, int n, Tape& tape) const {
    const int L = static_cast<int>(dims_.size()) - 1;
    tape.n = n;
    tape.acts.resize(L + 1);
    tape.acts[0].assign(X, X + static_cast<std::size_t>(n) * dims_[0]);
    for (int l = 0; l < L; ++l) {
        const int in = dims_[l], out = dims_[l + 1];
        const double* W = theta_.data() + w_off_[l];
        const double* b = theta_.data() + b_off_[l];
        const std::vector<double>& A = tape.acts[l];
        std::vector<double>& Y = tape.acts[l + 1];
        Y.assign(static_cast<std::size_t>(n) * out, 0.0);
        for (int i = 0; i < n; ++i) {
            const double* xi = A.data() + static_cast<std::size_t>(i) * in;
            double* yi = Y.data() + static_cast<std::size_t>(i) * out;
            for (int o = 0; o < out; ++o) {
                const double* wo = W + static_cast<std::size_t>(o) * in;
                double acc = b[o];
                for (int k = 0; k < in; ++k) acc += xi[k] * wo[k];
                yi[o] = acc;
            }
        }
        if (l < L - 1) {
            for (double& v : Y) v = v > 0.0 ? v : 0.0;
        }
    }
}

std::vector<double> Mlp::forward_one(const std::vector<double>& x) const {
    Tape tape;
    forward(x.data(), 1, tape);
    return tape.acts.back();
}

void Mlp::backward(const Tape& tape, const std::vector<double>& dLdY, std::vector<double>* dLdX) {
    const int L = static_cast<int>(dims_.size()) - 1;
    const int n = tape.n;
    std::vector<double> dcur = dLdY;
    for (int l = L - 1; l >= 0; --l) {
        const int in = dims_[l], out = dims_[l + 1];
        const std::vector<double>& A = tape.acts[l];
        double* dW = grad_.data() + w_off_[l];
        double* db = grad_.data() + b_off_[l];
        for (int i = 0; i < n; ++i) {
            const double* xi = A.data() + static_cast<std::size_t>(i) * in;
            const double* di = dcur.data() + static_cast<std::size_t>(i) * out;
            for (int o = 0; o < out; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                db[o] += d;
                double* dwo = dW + static_cast<std::size_t>(o) * in;
                for (int k = 0; k < in; ++k) dwo[k] += d * xi[k];
            }
        }
        if (l > 0 || dLdX) {
            const double* W = theta_.data() + w_off_[l];
            std::vector<double> dprev(static_cast<std::size_t>(n) * in, 0.0);
            for (int i = 0; i < n; ++i) {
                const double* di = dcur.data() + static_cast<std::size_t>(i) * out;
                double* dp = dprev.data() + static_cast<std::size_t>(i) * in;
                for (int o = 0; o < out; ++o) {
                    const double d = di[o];
                    if (d == 0.0) continue;
                    const double* wo = W + static_cast<std::size_t>(o) * in;
                    for (int k = 0; k < in; ++k) dp[k] += d * wo[k];
                }
            }
            if (l > 0) {
                // The stored activation is post-ReLU, so its sign gates the gradient.
                for (std::size_t i = 0; i < dprev.size(); ++i) {
                    if (A[i] <= 0.0) dprev[i] = 0.0;
                }
            }
            dcur = std::move(dprev);
        }
    }
    if (dLdX) *dLdX = std::move(dcur);
}

void Mlp::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

std::vector<ParamBlock> Mlp::params() {
    return {ParamBlock{theta_.data(), grad_.data(), theta_.size()}};
}

void Adam::step(const std::vector<ParamBlock>& blocks) {
    std::size_t total = 0;
    for (const ParamBlock& b : blocks) total += b.n;
    if (m_.size() != total) {
        m_.assign(total, 0.0);
        v_.assign(total, 0.0);
        t_ = 0;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::size_t at = 0;
    for (const ParamBlock& b : blocks) {
        for (std::size_t i = 0; i < b.n; ++i, ++at) {
            const double g = b.grad[i];
            m_[at] = beta1_ * m_[at] + (1.0 - beta1_) * g;
            v_[at] = beta2_ * v_[at] + (1.0 - beta2_) * g * g;
            const double mhat = m_[at] / c1;
            const double vhat = v_[at] / c2;
            b.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

double mse_loss(const std::vector<double>& Y, const std::vector<double>& T, int n, int dim,
                std::vector<double>& dLdY) {
    const double scale = 1.0 / (static_cast<double>(n) * dim);
    dLdY.resize(Y.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < Y.size(); ++i) {
        const double diff = Y[i] - T[i];
        loss += diff * diff;
        dLdY[i] = 2.0 * diff * scale;
    }
    return loss * scale;
}

double gaussian_variance(double raw) {
    const double elu = raw > 0.0 ? raw : std::exp(raw) - 1.0;
    return elu + 1.0 + 1e-6;
}

double gaussian_nll_loss(const std::vector<double>& Y, const std::vector<double>& A, int n, int m,
                         std::vector<double>& dLdY) {
    const double inv_n = 1.0 / n;
    dLdY.assign(Y.size(), 0.0);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* yi = Y.data() + static_cast<std::size_t>(i) * 2 * m;
        const double* ai = A.data() + static_cast<std::size_t>(i) * m;
        double* di = dLdY.data() + static_cast<std::size_t>(i) * 2 * m;
        for (int j = 0; j < m; ++j) {
            const double mu = yi[j];
            const double raw = yi[m + j];
            const double var = gaussian_variance(raw);
            const double diff = mu - ai[j];
            loss += 0.5 * (std::log(2.0 * M_PI) + std::log(var) + diff * diff / var);
            di[j] = diff / var * inv_n;
            const double dvar = 0.5 * (1.0 / var - diff * diff / (var * var));
            const double delu = raw > 0.0 ? 1.0 : std::exp(raw);
            di[m + j] = dvar * delu * inv_n;
        }
    }
    return loss * inv_n;
}

double bce_logit_loss(const std::vector<double>& Y, const std::vector<double>& T, int n,
                      std::vector<double>& dLdY) {
    const double inv_n = 1.0 / n;
    dLdY.resize(Y.size());
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = Y[i];
        const double t = T[i];
        loss += softplus(z) - t * z;
        dLdY[i] = (sigmoid(z) - t) * inv_n;
    }
    return loss * inv_n;
}

std::vector<double> gaussian_sample(const std::vector<double>& head_out, int m, Rng& rng,
                                    double clip_std) {
    std::vector<double> out(m);
    for (int j = 0; j < m; ++j) {
        double z = rng.normal();
        if (clip_std > 0.0) z = std::clamp(z, -clip_std, clip_std);
        out[j] = head_out[j] + std::sqrt(gaussian_variance(head_out[m + j])) * z;
    }
    return out;
}

Standardizer Standardizer::fit(const std::vector<double>& X, int n, int dim) {
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.std.assign(dim, 1.0);
    if (n == 0) return s;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) s.mean[j] += X[static_cast<std::size_t>(i) * dim + j];
    }
    for (double& v : s.mean) v /= n;
    std::vector<double> var(dim, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) {
            const double d = X[static_cast<std::size_t>(i) * dim + j] - s.mean[j];
            var[j] += d * d;
        }
    }
    for (int j = 0; j < dim; ++j) {
        const double sd = std::sqrt(var[j] / n);
        s.std[j] = sd < 1e-8 ? 1.0 : sd;
    }
    return s;
}

void Standardizer::apply(std::vector<double>& X) const {
    const int d = dim();
    for (std::size_t i = 0; i < X.size(); ++i) {
        const int j = static_cast<int>(i % d);
        X[i] = (X[i] - mean[j]) / std[j];
    }
}

void Standardizer::apply_row(double* row) const {
    for (int j = 0; j < dim(); ++j) row[j] = (row[j] - mean[j]) / std[j];
}

void Standardizer::invert_row(double* row) const {
    for (int j = 0; j < dim(); ++j) row[j] = row[j] * std[j] + mean[j];
}

// ---------------------------------------------------------------------------
// Graph network

struct GraphNet::LayerNormTape {
    std::vector<double> xhat;  // n x d
    std::vector<double> istd;  // n
};

namespace {

constexpr double kLnEps = 1e-5;

void layer_norm_forward(const std::vector<double>& X, int n, int d, const double* gamma,
                        const double* beta, std::vector<double>& Y,
                        GraphNet::LayerNormTape& tape) {
    Y.resize(X.size());
    tape.xhat.resize(X.size());
    tape.istd.resize(n);
    for (int i = 0; i < n; ++i) {
        const double* x = X.data() + static_cast<std::size_t>(i) * d;
        double* y = Y.data() + static_cast<std::size_t>(i) * d;
        double* xh = tape.xhat.data() + static_cast<std::size_t>(i) * d;
        double mean = 0.0;
        for (int j = 0; j < d; ++j) mean += x[j];
        mean /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            const double dv = x[j] - mean;
            var += dv * dv;
        }
        var /= d;
        const double istd = 1.0 / std::sqrt(var + kLnEps);
        tape.istd[i] = istd;
        for (int j = 0; j < d; ++j) {
            xh[j] = (x[j] - mean) * istd;
            y[j] = gamma[j] * xh[j] + beta[j];
        }
    }
}

void layer_norm_backward(const std::vector<double>& dY, int n, int d, const double* gamma,
                         const GraphNet::LayerNormTape& tape, std::vector<double>& dX,
                         double* dgamma, double* dbeta) {
    dX.resize(dY.size());
    for (int i = 0; i < n; ++i) {
        const double* dy = dY.data() + static_cast<std::size_t>(i) * d;
        const double* xh = tape.xhat.data() + static_cast<std::size_t>(i) * d;
        double* dx = dX.data() + static_cast<std::size_t>(i) * d;
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (int j = 0; j < d; ++j) {
            dgamma[j] += dy[j] * xh[j];
            dbeta[j] += dy[j];
            const double dxh = dy[j] * gamma[j];
            sum_dxhat += dxh;
            sum_dxhat_xhat += dxh * xh[j];
        }
        const double istd = tape.istd[i];
        for (int j = 0; j < d; ++j) {
            const double dxh = dy[j] * gamma[j];
            dx[j] = istd * (dxh - sum_dxhat / d - xh[j] * sum_dxhat_xhat / d);
        }
    }
}

}  // namespace

struct GraphNet::ForwardTrace {
    Mlp::Tape ne_tape, ee_tape, dec_tape;
    LayerNormTape ne_ln, ee_ln;
    std::vector<double> V0, E0;
    struct Round {
        Mlp::Tape ep_tape, np_tape;
        LayerNormTape ep_ln, np_ln;
        std::vector<double> e_in, n_in, E, V;
    };
    std::vector<Round> rounds;
    std::vector<double> logits;
};

GraphNet::GraphNet(int node_dim, int edge_dim, int hidden, int rounds, Rng& rng)
    : node_dim_(node_dim), edge_dim_(edge_dim), hidden_(hidden), rounds_(rounds) {
    node_enc_ = Mlp({node_dim, hidden, hidden}, rng);
    edge_enc_ = Mlp({edge_dim, hidden, hidden}, rng);
    node_proc_ = Mlp({2 * hidden, hidden, hidden}, rng);
    edge_proc_ = Mlp({3 * hidden, hidden, hidden}, rng);
    node_dec_ = Mlp({hidden, hidden, 1}, rng);
    // gamma=1, beta=0 for the four norms (node enc, edge enc, node proc, edge proc)
    ln_theta_.assign(8 * static_cast<std::size_t>(hidden), 0.0);
    for (int k = 0; k < 4; ++k) {
        for (int j = 0; j < hidden; ++j) ln_theta_[2 * k * hidden + j] = 1.0;
    }
    ln_grad_.assign(ln_theta_.size(), 0.0);
}

void GraphNet::run_forward(const Graph& g, ForwardTrace& tr) const {
    const int h = hidden_;
    const int n = g.n_nodes, e = g.n_edges();
    const double* ne_g = ln_theta_.data() + 0 * h;
    const double* ne_b = ln_theta_.data() + 1 * h;
    const double* ee_g = ln_theta_.data() + 2 * h;
    const double* ee_b = ln_theta_.data() + 3 * h;
    const double* np_g = ln_theta_.data() + 4 * h;
    const double* np_b = ln_theta_.data() + 5 * h;
    const double* ep_g = ln_theta_.data() + 6 * h;
    const double* ep_b = ln_theta_.data() + 7 * h;

    node_enc_.forward(g.nodes.data(), n, tr.ne_tape);
    layer_norm_forward(tr.ne_tape.acts.back(), n, h, ne_g, ne_b, tr.V0, tr.ne_ln);
    if (e > 0) {
        edge_enc_.forward(g.edges.data(), e, tr.ee_tape);
        layer_norm_forward(tr.ee_tape.acts.back(), e, h, ee_g, ee_b, tr.E0, tr.ee_ln);
    } else {
        tr.E0.clear();
    }

    tr.rounds.resize(rounds_);
    const std::vector<double>* V = &tr.V0;
    const std::vector<double>* E = &tr.E0;
    for (int t = 0; t < rounds_; ++t) {
        ForwardTrace::Round& r = tr.rounds[t];
        if (e > 0) {
            r.e_in.resize(static_cast<std::size_t>(e) * 3 * h);
            for (int k = 0; k < e; ++k) {
                double* row = r.e_in.data() + static_cast<std::size_t>(k) * 3 * h;
                std::copy_n(E->data() + static_cast<std::size_t>(k) * h, h, row);
                std::copy_n(V->data() + static_cast<std::size_t>(g.src[k]) * h, h, row + h);
                std::copy_n(V->data() + static_cast<std::size_t>(g.dst[k]) * h, h, row + 2 * h);
            }
            edge_proc_.forward(r.e_in.data(), e, r.ep_tape);
            layer_norm_forward(r.ep_tape.acts.back(), e, h, ep_g, ep_b, r.E, r.ep_ln);
        }
        r.n_in.assign(static_cast<std::size_t>(n) * 2 * h, 0.0);
        for (int i = 0; i < n; ++i) {
            std::copy_n(V->data() + static_cast<std::size_t>(i) * h, h,
                        r.n_in.data() + static_cast<std::size_t>(i) * 2 * h);
        }
        for (int k = 0; k < e; ++k) {
            double* agg = r.n_in.data() + static_cast<std::size_t>(g.dst[k]) * 2 * h + h;
            const double* ek = r.E.data() + static_cast<std::size_t>(k) * h;
            for (int j = 0; j < h; ++j) agg[j] += ek[j];
        }
        node_proc_.forward(r.n_in.data(), n, r.np_tape);
        layer_norm_forward(r.np_tape.acts.back(), n, h, np_g, np_b, r.V, r.np_ln);
        V = &r.V;
        E = &r.E;
    }
    node_dec_.forward(V->data(), n, tr.dec_tape);
    tr.logits = tr.dec_tape.acts.back();
}

std::vector<double> GraphNet::forward(const Graph& g) const {
    ForwardTrace tr;
    run_forward(g, tr);
    return tr.logits;
}

double GraphNet::backward_bce(const Graph& g) {
    ForwardTrace tr;
    run_forward(g, tr);
    const int h = hidden_;
    const int n = g.n_nodes, e = g.n_edges();
    const double inv_n = 1.0 / n;

    double loss = 0.0;
    std::vector<double> dlogits(n);
    for (int i = 0; i < n; ++i) {
        const double z = tr.logits[i];
        const double t = g.labels[i];
        loss += (softplus(z) - t * z) * inv_n;
        dlogits[i] = (sigmoid(z) - t) * inv_n;
    }

    const double* ne_g = ln_theta_.data() + 0 * h;
    const double* ee_g = ln_theta_.data() + 2 * h;
    const double* np_g = ln_theta_.data() + 4 * h;
    const double* ep_g = ln_theta_.data() + 6 * h;
    double* d_ne_g = ln_grad_.data() + 0 * h;
    double* d_ne_b = ln_grad_.data() + 1 * h;
    double* d_ee_g = ln_grad_.data() + 2 * h;
    double* d_ee_b = ln_grad_.data() + 3 * h;
    double* d_np_g = ln_grad_.data() + 4 * h;
    double* d_np_b = ln_grad_.data() + 5 * h;
    double* d_ep_g = ln_grad_.data() + 6 * h;
    double* d_ep_b = ln_grad_.data() + 7 * h;

    std::vector<double> dV;
    node_dec_.backward(tr.dec_tape, dlogits, &dV);
    std::vector<double> dE(static_cast<std::size_t>(e) * h, 0.0);

    for (int t = rounds_ - 1; t >= 0; --t) {
        ForwardTrace::Round& r = tr.rounds[t];
        // V_{t+1} = LN(node_proc([V_t, agg]))
        std::vector<double> d_np_out;
        layer_norm_backward(dV, n, h, np_g, r.np_ln, d_np_out, d_np_g, d_np_b);
        std::vector<double> d_n_in;
        node_proc_.backward(r.np_tape, d_np_out, &d_n_in);
        std::vector<double> dV_prev(static_cast<std::size_t>(n) * h, 0.0);
        for (int i = 0; i < n; ++i) {
            const double* src_row = d_n_in.data() + static_cast<std::size_t>(i) * 2 * h;
            double* dst_row = dV_prev.data() + static_cast<std::size_t>(i) * h;
            for (int j = 0; j < h; ++j) dst_row[j] += src_row[j];
        }
        // Aggregated-message gradients flow to this round's edge outputs.
        for (int k = 0; k < e; ++k) {
            const double* dagg = d_n_in.data() + static_cast<std::size_t>(g.dst[k]) * 2 * h + h;
            double* dek = dE.data() + static_cast<std::size_t>(k) * h;
            for (int j = 0; j < h; ++j) dek[j] += dagg[j];
        }
        std::vector<double> dE_prev;
        if (e > 0) {
            std::vector<double> d_ep_out;
            layer_norm_backward(dE, e, h, ep_g, r.ep_ln, d_ep_out, d_ep_g, d_ep_b);
            std::vector<double> d_e_in;
            edge_proc_.backward(r.ep_tape, d_ep_out, &d_e_in);
            dE_prev.assign(static_cast<std::size_t>(e) * h, 0.0);
            for (int k = 0; k < e; ++k) {
                const double* row = d_e_in.data() + static_cast<std::size_t>(k) * 3 * h;
                double* dek = dE_prev.data() + static_cast<std::size_t>(k) * h;
                for (int j = 0; j < h; ++j) dek[j] += row[j];
                double* dvs = dV_prev.data() + static_cast<std::size_t>(g.src[k]) * h;
                double* dvd = dV_prev.data() + static_cast<std::size_t>(g.dst[k]) * h;
                for (int j = 0; j < h; ++j) {
                    dvs[j] += row[h + j];
                    dvd[j] += row[2 * h + j];
                }
            }
        }
        dV = std::move(dV_prev);
        dE = std::move(dE_prev);
        if (dE.empty()) dE.assign(static_cast<std::size_t>(e) * h, 0.0);
    }

    std::vector<double> d_enc_out;
    layer_norm_backward(dV, n, h, ne_g, tr.ne_ln, d_enc_out, d_ne_g, d_ne_b);
    node_enc_.backward(tr.ne_tape, d_enc_out);
    if (e > 0) {
        std::vector<double> d_ee_out;
        layer_norm_backward(dE, e, h, ee_g, tr.ee_ln, d_ee_out, d_ee_g, d_ee_b);
        edge_enc_.backward(tr.ee_tape, d_ee_out);
    }
    return loss;
}

void GraphNet::zero_grad() {
    for (Mlp* m : blocks()) m->zero_grad();
    std::fill(ln_grad_.begin(), ln_grad_.end(), 0.0);
}

std::vector<ParamBlock> GraphNet::params() {
    std::vector<ParamBlock> out;
    for (Mlp* m : blocks()) {
        for (ParamBlock b : m->params()) out.push_back(b);
    }
    out.push_back(ParamBlock{ln_theta_.data(), ln_grad_.data(), ln_theta_.size()});
    return out;
}

double gnn_train_step(GraphNet& net, const std::vector<const Graph*>& batch, Adam& opt) {
    net.zero_grad();
    double loss = 0.0;
    for (const Graph* g : batch) loss += net.backward_bce(*g);
    loss /= batch.size();
    // Match the reported loss scale: gradients were accumulated unscaled.
    for (ParamBlock b : net.params()) {
        for (std::size_t i = 0; i < b.n; ++i) b.grad[i] /= batch.size();
    }
    opt.step(net.params());
    return loss;
}

}  // namespace nsrtplan
