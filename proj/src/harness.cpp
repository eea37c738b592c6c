#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include "nsrtplan/harness.hpp"

namespace nsrtplan {

namespace {

// 17 significant digits round-trip IEEE doubles exactly, which makes the
// serialize -> parse -> serialize identity hold byte for byte.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

class TokenReader {
public:
    explicit TokenReader(const std::string& text) : in_(text) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw std::runtime_error("parse error: unexpected end of input");
        return w;
    }
    void expect(const std::string& key) {
        const std::string w = word();
        if (w != key) {
            throw std::runtime_error("parse error: expected '" + key + "', got '" + w + "'");
        }
    }
    long integer() { return std::stol(word()); }
    double real() { return std::stod(word()); }

private:
    std::istringstream in_;
};

void put_mlp(std::ostringstream& out, const Mlp& m) {
    out << "mlp " << m.dims().size();
    for (int d : m.dims()) out << ' ' << d;
    out << ' ' << m.theta().size();
    for (double v : m.theta()) out << ' ' << fmt(v);
    out << '\n';
}

Mlp get_mlp(TokenReader& tr) {
    tr.expect("mlp");
    const int nd = static_cast<int>(tr.integer());
    std::vector<int> dims(nd);
    for (int& d : dims) d = static_cast<int>(tr.integer());
    const std::size_t nt = static_cast<std::size_t>(tr.integer());
    if (nd == 0) {
        if (nt != 0) throw std::runtime_error("parse error: parameters without layers");
        return Mlp{};
    }
    Rng dummy(0);
    Mlp m(dims, dummy);
    if (m.theta().size() != nt) throw std::runtime_error("parse error: parameter count mismatch");
    for (double& v : m.theta()) v = tr.real();
    return m;
}

void put_standardizer(std::ostringstream& out, const Standardizer& s) {
    out << "norm " << s.mean.size();
    for (double v : s.mean) out << ' ' << fmt(v);
    for (double v : s.std) out << ' ' << fmt(v);
    out << '\n';
}

Standardizer get_standardizer(TokenReader& tr) {
    tr.expect("norm");
    const int d = static_cast<int>(tr.integer());
    Standardizer s;
    s.mean.resize(d);
    s.std.resize(d);
    for (double& v : s.mean) v = tr.real();
    for (double& v : s.std) v = tr.real();
    return s;
}

void put_atoms(std::ostringstream& out, const char* tag, const std::vector<LiftedAtom>& atoms) {
    out << tag << ' ' << atoms.size() << '\n';
    for (const LiftedAtom& a : atoms) {
        out << a.pred->name << ' ' << a.args.size();
        for (const Variable& v : a.args) out << ' ' << v.name;
        out << '\n';
    }
}

std::vector<LiftedAtom> get_atoms(TokenReader& tr, const char* tag, const Env& env,
                                  const std::map<std::string, Variable>& vars) {
    tr.expect(tag);
    const int n = static_cast<int>(tr.integer());
    std::vector<LiftedAtom> atoms(n);
    for (LiftedAtom& a : atoms) {
        const std::string pname = tr.word();
        a.pred = env.predicate(pname);
        if (a.pred == nullptr) throw std::runtime_error("parse error: unknown predicate " + pname);
        const int na = static_cast<int>(tr.integer());
        for (int j = 0; j < na; ++j) {
            const std::string vname = tr.word();
            const auto it = vars.find(vname);
            if (it == vars.end()) throw std::runtime_error("parse error: unbound " + vname);
            a.args.push_back(it->second);
        }
    }
    return atoms;
}

}  // namespace

std::vector<Transition> Dataset::merged() const {
    std::vector<Transition> all = transitions;
    all.insert(all.end(), failures.begin(), failures.end());
    return all;
}

Dataset collect_data(const Env& env, int n_episodes, std::uint64_t seed) {
    Dataset d;
    d.env_name = env.name();
    Rng rng(derive_seed(seed, "collect"));
    for (int ep = 0; ep < n_episodes; ++ep) {
        const Task task = env.generate_task(TaskSplit::train, rng);
        State s = task.init;
        for (int t = 0; t < task.horizon; ++t) {
            std::vector<double> a = env.sample_prior(s, rng);
            StepResult r = env.step(s, a);
            Transition tr{s, std::move(a), r.next, r.failure, r.failure_objects};
            if (r.failure) {
                d.failures.push_back(std::move(tr));
                break;
            }
            d.transitions.push_back(std::move(tr));
            s = std::move(r.next);
            if (goal_holds(s, task.goal)) break;
        }
    }
    return d;
}

ModelBundle train_pipeline(const Dataset& data, const Env& env, const TrainConfig& cfg,
                           std::uint64_t seed, std::ostream* log) {
    ModelBundle b;
    b.env_name = env.name();
    b.dataset_fingerprint = fingerprint(serialize_dataset(data));
    b.config_fingerprint = fingerprint(format_train_config(cfg, seed));
    if (data.size() == 0) {
        if (log) *log << "train: empty dataset, writing an empty bundle\n";
        return b;
    }
    StageTimes st;
    b.model = learn_model(data.merged(), env, cfg, seed, &st);
    if (log) {
        *log << "train: " << b.model.nsrts.size() << " operators"
             << (b.model.has_failure_net ? " + failure predictor" : "") << "; abstraction "
             << num(st.abstraction_s) << "s, partition " << num(st.partition_s) << "s, symbolic "
             << num(st.symbolic_s) << "s, heads " << num(st.heads_s) << "s, failure-net "
             << num(st.failure_s) << "s\n";
    }
    return b;
}

ResultRow evaluate(const Env& env, const ModelBundle* bundle, Method method, TaskSplit split,
                   int n_tasks, std::uint64_t seed, const PlannerConfig& cfg) {
    if (method != Method::b5 && bundle == nullptr) {
        throw std::invalid_argument("method requires a trained bundle");
    }
    ResultRow row;
    row.env_name = env.name();
    row.method = method;
    row.seed = seed;
    row.split = split;

    const std::string sname = split_name(split);
    int solved = 0;
    double wall = 0.0, len = 0.0;
    for (int i = 0; i < n_tasks; ++i) {
        Rng task_rng(derive_seed(seed, "task:" + sname + ":" + std::to_string(i)));
        const Task task = env.generate_task(split, task_rng);
        Rng ep_rng(derive_seed(
            seed, "episode:" + std::string(method_name(method)) + ":" + sname + ":" +
                      std::to_string(i)));
        const EpisodeResult er =
            run_episode(env, bundle ? &bundle->model : nullptr, task, method, cfg, ep_rng);
        if (er.solved) {
            ++solved;
            wall += er.plan_wall_s;
            len += er.plan_len;
        }
    }
    row.solve_rate = 100.0 * solved / n_tasks;
    if (solved > 0) {
        row.mean_wall_s = wall / solved;
        row.mean_plan_len = len / solved;
    }
    return row;
}

const char* kCsvHeader = "env,method,seed,train_episodes,split,solve_rate,mean_wall_s,mean_plan_len";

std::string csv_row(const ResultRow& r) {
    std::ostringstream out;
    out << r.env_name << ',' << method_name(r.method) << ',' << r.seed << ',' << r.train_episodes
        << ',' << split_name(r.split) << ',' << num(r.solve_rate) << ',' << num(r.mean_wall_s)
        << ',' << num(r.mean_plan_len);
    return out.str();
}

std::vector<ResultRow> learning_curve(const ExperimentConfig& cfg, const Env& env,
                                      std::ostream* csv) {
    struct Job {
        int episodes;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int e : cfg.episode_grid) {
        for (std::uint64_t s : cfg.seeds) jobs.push_back(Job{e, s});
    }

    auto run_job = [&cfg, &env](Job j) {
        const Dataset data = collect_data(env, j.episodes, j.seed);
        const ModelBundle bundle = train_pipeline(data, env, cfg.train, j.seed);
        std::vector<ResultRow> rows;
        for (Method m : cfg.methods) {
            for (TaskSplit split : {TaskSplit::test_easy, TaskSplit::test_hard}) {
                ResultRow r =
                    evaluate(env, &bundle, m, split, cfg.test_tasks, j.seed, cfg.planner);
                r.train_episodes = j.episodes;
                rows.push_back(std::move(r));
            }
        }
        return rows;
    };

    if (csv) {
        *csv << kCsvHeader << '\n';
        csv->flush();
    }
    std::vector<ResultRow> all;
    const std::size_t window = static_cast<std::size_t>(std::max(1, cfg.workers));
    std::vector<std::future<std::vector<ResultRow>>> futs(jobs.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        while (next < jobs.size() && next < i + window) {
            futs[next] = std::async(std::launch::async, run_job, jobs[next]);
            ++next;
        }
        for (ResultRow& r : futs[i].get()) {
            if (csv) {
                *csv << csv_row(r) << '\n';
                csv->flush();  // partial results survive an interruption
            }
            all.push_back(std::move(r));
        }
    }
    return all;
}

std::string serialize_dataset(const Dataset& d) {
    std::ostringstream out;
    out << "nsrtplan_dataset 1\n";
    out << "env " << d.env_name << '\n';
    out << "counts " << d.transitions.size() << ' ' << d.failures.size() << '\n';
    auto emit = [&out](const Transition& t) {
        out << "record " << t.s.objects().size() << ' ' << t.action.size() << ' '
            << t.failure_objects.size() << '\n';
        for (const Object& o : t.s.objects()) out << o.name << ' ' << o.type->name << '\n';
        out << "state";
        for (const Object& o : t.s.objects()) {
            for (double v : t.s.attrs(o)) out << ' ' << fmt(v);
        }
        out << "\naction";
        for (double v : t.action) out << ' ' << fmt(v);
        out << "\nnext";
        for (const Object& o : t.next.objects()) {
            for (double v : t.next.attrs(o)) out << ' ' << fmt(v);
        }
        out << '\n';
        if (!t.failure_objects.empty()) {
            out << "fail";
            for (const Object& o : t.failure_objects) out << ' ' << o.name;
            out << '\n';
        }
    };
    for (const Transition& t : d.transitions) emit(t);
    for (const Transition& t : d.failures) emit(t);
    return out.str();
}

Dataset parse_dataset(const std::string& text, const Env& env) {
    TokenReader tr(text);
    tr.expect("nsrtplan_dataset");
    if (tr.integer() != 1) throw std::runtime_error("dataset: unsupported version");
    tr.expect("env");
    Dataset d;
    d.env_name = tr.word();
    if (d.env_name != env.name()) {
        throw std::runtime_error("dataset: environment mismatch (" + d.env_name + ")");
    }
    tr.expect("counts");
    const long nt = tr.integer();
    const long nf = tr.integer();
    for (long rec = 0; rec < nt + nf; ++rec) {
        tr.expect("record");
        const int k = static_cast<int>(tr.integer());
        const int m = static_cast<int>(tr.integer());
        const int nfail = static_cast<int>(tr.integer());
        std::vector<Object> objs;
        objs.reserve(k);
        for (int i = 0; i < k; ++i) {
            const std::string oname = tr.word();
            const std::string tname = tr.word();
            const ObjType* ty = env.type(tname);
            if (ty == nullptr) throw std::runtime_error("dataset: unknown type " + tname);
            objs.push_back(Object{oname, ty});
        }
        Transition t;
        tr.expect("state");
        for (const Object& o : objs) {
            std::vector<double> attrs(o.type->dim);
            for (double& v : attrs) v = tr.real();
            t.s.add_object(o, std::move(attrs));
        }
        tr.expect("action");
        t.action.resize(m);
        for (double& v : t.action) v = tr.real();
        tr.expect("next");
        for (const Object& o : objs) {
            std::vector<double> attrs(o.type->dim);
            for (double& v : attrs) v = tr.real();
            t.next.add_object(o, std::move(attrs));
        }
        if (nfail > 0) {
            tr.expect("fail");
            for (int i = 0; i < nfail; ++i) {
                const std::string oname = tr.word();
                const auto it = std::find_if(objs.begin(), objs.end(),
                                             [&](const Object& o) { return o.name == oname; });
                if (it == objs.end()) throw std::runtime_error("dataset: unknown object " + oname);
                t.failure_objects.push_back(*it);
            }
        }
        t.failure = rec >= nt;
        (t.failure ? d.failures : d.transitions).push_back(std::move(t));
    }
    return d;
}

std::string serialize_bundle(const ModelBundle& b) {
    std::ostringstream out;
    out << "nsrtplan_bundle 1\n";
    out << "env " << b.env_name << '\n';
    out << "dataset " << b.dataset_fingerprint << '\n';
    out << "config " << b.config_fingerprint << '\n';
    out << "nsrts " << b.model.nsrts.size() << '\n';
    for (const Nsrt& op : b.model.nsrts) {
        out << "nsrt " << op.name << ' ' << op.action_dim << '\n';
        out << "params " << op.params.size() << '\n';
        for (const Variable& v : op.params) out << v.name << ' ' << v.type->name << '\n';
        put_atoms(out, "pre", op.preconditions);
        put_atoms(out, "add", op.add_effects);
        put_atoms(out, "del", op.del_effects);
        out << "changed " << op.changed_slots.size();
        for (int s : op.changed_slots) out << ' ' << s;
        out << '\n';
        put_mlp(out, op.transition);
        put_standardizer(out, op.trans_in);
        put_standardizer(out, op.trans_out);
        put_mlp(out, op.sampler);
        put_standardizer(out, op.samp_in);
        put_standardizer(out, op.samp_act);
        put_mlp(out, op.classifier);
        put_standardizer(out, op.clas_in);
    }
    out << "failure " << (b.model.has_failure_net ? 1 : 0) << '\n';
    if (b.model.has_failure_net) {
        const GraphNet& net = b.model.failure_net;
        out << "gnn " << net.node_dim() << ' ' << net.edge_dim() << ' ' << net.hidden() << ' '
            << net.rounds() << '\n';
        for (const Mlp* blk : net.blocks()) {
            out << "block " << blk->theta().size();
            for (double v : blk->theta()) out << ' ' << fmt(v);
            out << '\n';
        }
        const std::vector<double>& ln = net.norm_params();
        out << "layernorm " << ln.size();
        for (double v : ln) out << ' ' << fmt(v);
        out << '\n';
    }
    return out.str();
}

ModelBundle parse_bundle(const std::string& text, const Env& env) {
    TokenReader tr(text);
    tr.expect("nsrtplan_bundle");
    if (tr.integer() != 1) throw std::runtime_error("bundle: unsupported version");
    tr.expect("env");
    ModelBundle b;
    b.env_name = tr.word();
    if (b.env_name != env.name()) {
        throw std::runtime_error("bundle: environment mismatch (" + b.env_name + ")");
    }
    tr.expect("dataset");
    b.dataset_fingerprint = tr.word();
    tr.expect("config");
    b.config_fingerprint = tr.word();
    tr.expect("nsrts");
    const int n = static_cast<int>(tr.integer());
    b.model.nsrts.reserve(n);
    for (int i = 0; i < n; ++i) {
        Nsrt op;
        tr.expect("nsrt");
        op.name = tr.word();
        op.action_dim = static_cast<int>(tr.integer());
        tr.expect("params");
        const int k = static_cast<int>(tr.integer());
        std::map<std::string, Variable> vars;
        for (int j = 0; j < k; ++j) {
            const std::string vname = tr.word();
            const std::string tname = tr.word();
            const ObjType* ty = env.type(tname);
            if (ty == nullptr) throw std::runtime_error("bundle: unknown type " + tname);
            op.params.push_back(Variable{vname, ty});
            vars.emplace(vname, op.params.back());
        }
        op.preconditions = get_atoms(tr, "pre", env, vars);
        op.add_effects = get_atoms(tr, "add", env, vars);
        op.del_effects = get_atoms(tr, "del", env, vars);
        tr.expect("changed");
        const int nc = static_cast<int>(tr.integer());
        op.changed_slots.resize(nc);
        for (int& s : op.changed_slots) s = static_cast<int>(tr.integer());
        op.transition = get_mlp(tr);
        op.trans_in = get_standardizer(tr);
        op.trans_out = get_standardizer(tr);
        op.sampler = get_mlp(tr);
        op.samp_in = get_standardizer(tr);
        op.samp_act = get_standardizer(tr);
        op.classifier = get_mlp(tr);
        op.clas_in = get_standardizer(tr);
        b.model.nsrts.push_back(std::move(op));
    }
    tr.expect("failure");
    b.model.has_failure_net = tr.integer() != 0;
    if (b.model.has_failure_net) {
        tr.expect("gnn");
        const int nd = static_cast<int>(tr.integer());
        const int ed = static_cast<int>(tr.integer());
        const int hidden = static_cast<int>(tr.integer());
        const int rounds = static_cast<int>(tr.integer());
        Rng dummy(0);
        b.model.failure_net = GraphNet(nd, ed, hidden, rounds, dummy);
        for (Mlp* blk : b.model.failure_net.blocks()) {
            tr.expect("block");
            const std::size_t nt = static_cast<std::size_t>(tr.integer());
            if (blk->theta().size() != nt) {
                throw std::runtime_error("bundle: graph-net parameter count mismatch");
            }
            for (double& v : blk->theta()) v = tr.real();
        }
        tr.expect("layernorm");
        const std::size_t nl = static_cast<std::size_t>(tr.integer());
        if (b.model.failure_net.norm_params().size() != nl) {
            throw std::runtime_error("bundle: layer-norm parameter count mismatch");
        }
        for (double& v : b.model.failure_net.norm_params()) v = tr.real();
    }
    return b;
}

std::string fingerprint(const std::string& text) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
    return buf;
}

std::string format_train_config(const TrainConfig& c, std::uint64_t seed) {
    std::ostringstream out;
    out << "seed=" << seed << ";sampler_epochs=" << c.sampler_epochs
        << ";transition_epochs=" << c.transition_epochs
        << ";classifier_epochs=" << c.classifier_epochs << ";epoch_scale=" << c.epoch_scale
        << ";gnn_epochs=" << c.gnn_epochs << ";gnn_batch=" << c.gnn_batch
        << ";gnn_hidden=" << c.gnn_hidden << ";gnn_rounds=" << c.gnn_rounds
        << ";lr=" << fmt(c.lr) << ";hidden=" << c.hidden
        << ";change_tolerance=" << fmt(c.change_tolerance);
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace nsrtplan
