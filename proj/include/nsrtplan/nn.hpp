#ifndef NSRTPLAN_NN_HPP
#define NSRTPLAN_NN_HPP

#include <cstddef>
#include <vector>

#include "nsrtplan/rng.hpp"

namespace nsrtplan {

// Small from-scratch differentiable toolkit: fully connected ReLU networks
// with hand-derived reverse-mode gradients, Adam, the three loss heads used
// by the model learner, and a node-scoring graph network.
// Everything is double precision and deterministic for a fixed seed.

struct ParamBlock {
    double* value;
    double* grad;
    std::size_t n;
};

// Multi-layer perceptron y = W_L(relu(...relu(W_1 x + b_1)...)) + b_L.
// Parameters live in one contiguous vector (simplifies Adam, serialization
// and finite-difference checks). Zero hidden layers means a plain affine map.
class Mlp {
public:
    // Activations from one forward pass, kept so that networks applied
    // several times per step (the graph net processor) can backprop each
    // application separately.
    struct Tape {
        int n = 0;
        std::vector<std::vector<double>> acts;  // acts[0] = input, acts.back() = output
    };

    Mlp() = default;
    Mlp(std::vector<int> dims, Rng& rng);  // init uniform in +-1/sqrt(fan_in)

    // X is row-major n x in_dim; returns row-major n x out_dim in tape.acts.back().
    void forward(const double* X, int n, Tape& tape) const;
    std::vector<double> forward_one(const std::vector<double>& x) const;

    // dLdY is row-major n x out_dim. Accumulates parameter gradients into
    // grad(); optionally produces dLdX.
    void backward(const Tape& tape, const std::vector<double>& dLdY,
                  std::vector<double>* dLdX = nullptr);

    void zero_grad();
    std::vector<ParamBlock> params();

    const std::vector<int>& dims() const { return dims_; }
    int in_dim() const { return dims_.front(); }
    int out_dim() const { return dims_.back(); }
    std::vector<double>& theta() { return theta_; }
    const std::vector<double>& theta() const { return theta_; }

private:
    // Layer l weights: rows out_l x cols in_l at w_off_[l]; bias at b_off_[l].
    std::vector<int> dims_;
    std::vector<std::size_t> w_off_, b_off_;
    std::vector<double> theta_, grad_;

    friend class GraphNet;
};

class Adam {
public:
    explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<ParamBlock>& blocks);

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<double> m_, v_;
};

// Loss heads. Each returns the scalar loss and fills dLdY (same shape as Y).
// Losses are means over the batch so learning rates transfer across sizes.
double mse_loss(const std::vector<double>& Y, const std::vector<double>& T, int n, int dim,
                std::vector<double>& dLdY);

// Y packs [mu | raw] per row (2m columns); variance_i = elu(raw_i) + 1 + 1e-6.
double gaussian_nll_loss(const std::vector<double>& Y, const std::vector<double>& A, int n, int m,
                         std::vector<double>& dLdY);

// Y holds one logit per row; T in {0,1}.
double bce_logit_loss(const std::vector<double>& Y, const std::vector<double>& T, int n,
                      std::vector<double>& dLdY);

double gaussian_variance(double raw);  // elu(raw) + 1 + 1e-6

// Draws from the diagonal Gaussian encoded by a [mu | raw] head output.
// Each coordinate's deviation is clipped to clip_std standard deviations
// (clip_std <= 0 disables clipping).
std::vector<double> gaussian_sample(const std::vector<double>& head_out, int m, Rng& rng,
                                    double clip_std);

// Per-feature affine normalizer fitted on training data and stored with the
// model so that inference applies the identical transform.
struct Standardizer {
    std::vector<double> mean, std;

    static Standardizer fit(const std::vector<double>& X, int n, int dim);
    void apply(std::vector<double>& X) const;         // (x - mean) / std, any row count
    void apply_row(double* row) const;
    void invert_row(double* row) const;               // x * std + mean
    int dim() const { return static_cast<int>(mean.size()); }
};

// Graph with per-node input features, directed edges with features, and a
// binary label per node.
struct Graph {
    int n_nodes = 0;
    int node_dim = 0, edge_dim = 0;
    std::vector<double> nodes;          // n_nodes x node_dim
    std::vector<int> src, dst;          // parallel arrays, one entry per edge
    std::vector<double> edges;          // n_edges x edge_dim
    std::vector<double> labels;         // n_nodes, in {0,1} (empty at inference)

    int n_edges() const { return static_cast<int>(src.size()); }
};

// Encode-process-decode network scoring each node. Message rounds share the
// processor weights; layer normalization follows the encoder and processor
// blocks. Aggregation is a sum over incoming edges, so node scores are
// equivariant under node permutations.
class GraphNet {
public:
    GraphNet() = default;
    GraphNet(int node_dim, int edge_dim, int hidden, int rounds, Rng& rng);

    std::vector<double> forward(const Graph& g) const;               // per-node logits
    // Accumulates gradients of mean-BCE over nodes; returns the loss.
    double backward_bce(const Graph& g);

    void zero_grad();
    std::vector<ParamBlock> params();

    int node_dim() const { return node_dim_; }
    int edge_dim() const { return edge_dim_; }
    int hidden() const { return hidden_; }
    int rounds() const { return rounds_; }

    // Flat access for serialization.
    std::vector<Mlp*> blocks() { return {&node_enc_, &edge_enc_, &node_proc_, &edge_proc_, &node_dec_}; }
    std::vector<const Mlp*> blocks() const {
        return {&node_enc_, &edge_enc_, &node_proc_, &edge_proc_, &node_dec_};
    }
    std::vector<double>& norm_params() { return ln_theta_; }
    const std::vector<double>& norm_params() const { return ln_theta_; }

    struct LayerNormTape;
    struct ForwardTrace;

private:

    void run_forward(const Graph& g, ForwardTrace& tr) const;

    int node_dim_ = 0, edge_dim_ = 0, hidden_ = 0, rounds_ = 0;
    Mlp node_enc_, edge_enc_, node_proc_, edge_proc_, node_dec_;
    // Four layer norms (node enc, edge enc, node proc, edge proc), gamma then
    // beta for each, all in one vector.
    std::vector<double> ln_theta_, ln_grad_;
};

// One optimization step: zero grads, forward+backward over the batch,
// Adam update. Returns the batch loss.
double gnn_train_step(GraphNet& net, const std::vector<const Graph*>& batch, Adam& opt);

}  // namespace nsrtplan

#endif
