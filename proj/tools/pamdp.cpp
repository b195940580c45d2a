// Command-line front end: solve a single model, compare both engines, or run
// a generator grid as a benchmark table.

#include <CLI11.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pamdp/oracle.hpp"
#include "pamdp/solver.hpp"
#include "pamdp/strips.hpp"

using namespace pamdp;

namespace {

struct RunConfig {
    std::string objective = "ssp";
    std::string engine = "symblicit";
    std::string gen;
    std::string input;
    std::string arith = "exact";
    double timeout = 0;  // seconds; 0 = none
    uint64_t seed = 0;
    std::string out;
};

MssModel load_model(const RunConfig& cfg) {
    Mss m;
    if (!cfg.input.empty()) {
        m = parse_mss_file(cfg.input);
    } else if (!cfg.gen.empty()) {
        auto colon = cfg.gen.find(':');
        std::string name = cfg.gen.substr(0, colon);
        int a = 0, b = 0;
        if (colon != std::string::npos &&
            sscanf(cfg.gen.c_str() + colon + 1, "%d,%d", &a, &b) != 2)
            throw std::invalid_argument("generator spec must be name:INT,INT");
        if (name == "monkey")
            m = gen_monkey(a, b);
        else if (name == "moats")
            m = gen_moats(a, b);
        else
            throw std::invalid_argument("unknown generator '" + name + "'");
    } else {
        throw std::invalid_argument("need --input or --gen");
    }
    auto model = mss_to_mdp(m);
    model.mdp.validate();
    return model;
}

std::string pe_record(const SubsetDomain& dom, const PseudoElement<SubsetDomain>& pe) {
    std::ostringstream os;
    os << "{max: " << dom.to_string(pe.x) << ", excluded: [";
    for (size_t i = 0; i < pe.alpha.elems.size(); ++i) {
        if (i) os << ", ";
        os << dom.to_string(pe.alpha.elems[i]);
    }
    os << "]}";
    return os.str();
}

std::string strategy_records(const MssModel& model, const Strategy<SubsetDomain>& lam) {
    std::ostringstream os;
    for (const auto& [pa, act] : lam.blocks) {
        os << "  {block: [";
        for (size_t i = 0; i < pa.elems.size(); ++i) {
            if (i) os << ", ";
            os << pe_record(model.dom, pa.elems[i]);
        }
        os << "], action: " << model.mdp.sigma[size_t(act)] << "}\n";
    }
    return os.str();
}

double total_ms(const std::vector<IterStat>& iters, double IterStat::*field) {
    double t = 0;
    for (const auto& it : iters) t += it.*field;
    return t;
}

std::string value_str(const Rat& v, const std::string& arith) {
    if (arith == "float") {
        std::ostringstream os;
        os << v.get_d();
        return os.str();
    }
    return rat_str(v);
}

std::string solve_symblicit_report(const RunConfig& cfg, MssModel& model) {
    std::ostringstream os;
    os << "objective: " << cfg.objective << "\n";
    os << "engine: symblicit\n";
    os << "model: " << (cfg.input.empty() ? cfg.gen : cfg.input) << "\n";
    os << "arith: " << cfg.arith << "\n";
    os << "seed: " << cfg.seed << "\n";
    os << "states: " << model.dom.state_count() << "\n";
    SolveReport<SubsetDomain> rep;
    if (cfg.objective == "ssp") {
        rep = solve_ssp_symblicit(model.mdp, model.goal);
        if (!pa_member(model.dom, model.init, rep.proper))
            throw std::runtime_error("unsolvable: initial state not proper");
    } else {
        prune_blocking(model);
        rep = solve_emp_symblicit(model.mdp);
    }
    os << "iterations: " << rep.iterations << "\n";
    os << "max_quotient: " << rep.max_quotient << "\n";
    os << (cfg.objective == "ssp" ? "value_initial: " : "gain_initial: ")
       << value_str(report_value_at(model.dom, rep, model.init), cfg.arith) << "\n";
    os << "blocks: " << rep.blocks.size() << "\n";
    for (size_t j = 0; j < rep.blocks.size(); ++j) {
        os << "block " << j << ": value " << value_str(rep.value[j], cfg.arith);
        if (cfg.objective == "emp") os << " bias " << value_str(rep.bias[j], cfg.arith);
        if (rep.blocks[j].goal) os << " goal";
        os << "\n";
    }
    os << "strategy:\n" << strategy_records(model, rep.strategy);
    os << "iteration table:\n#it |S_~L| lump syst impr total\n";
    for (size_t k = 0; k < rep.iters.size(); ++k) {
        const auto& it = rep.iters[k];
        double tot = it.lump_ms + it.solve_ms + it.improve_ms;
        os << (k + 1) << " " << it.quotient << " " << it.lump_ms << " " << it.solve_ms << " "
           << it.improve_ms << " " << tot << "\n";
    }
    os << "lump_ms: " << total_ms(rep.iters, &IterStat::lump_ms) << "\n";
    os << "syst_ms: " << total_ms(rep.iters, &IterStat::solve_ms) << "\n";
    os << "impr_ms: " << total_ms(rep.iters, &IterStat::improve_ms) << "\n";
    return os.str();
}

std::string solve_explicit_report(const RunConfig& cfg, MssModel& model) {
    std::ostringstream os;
    os << "objective: " << cfg.objective << "\n";
    os << "engine: explicit\n";
    os << "model: " << (cfg.input.empty() ? cfg.gen : cfg.input) << "\n";
    os << "arith: " << cfg.arith << "\n";
    os << "seed: " << cfg.seed << "\n";
    os << "states: " << model.dom.state_count() << "\n";
    ExplicitSolve sol;
    size_t init_index = 0;
    if (cfg.objective == "ssp") {
        auto en = enumerate_mdp<SubsetDomain>(model.mdp, &model.goal, nullptr);
        sol = explicit_ssp(en.e);
        while (en.states[init_index] != model.init) ++init_index;
        if (!sol.proper[init_index]) throw std::runtime_error("unsolvable: initial state not proper");
    } else {
        prune_blocking(model);
        auto u = mdp_carrier(model.mdp);
        auto en = enumerate_mdp<SubsetDomain>(model.mdp, nullptr, &u);
        sol = explicit_emp(en.e, en.init_emp);
        while (en.states[init_index] != model.init) ++init_index;
    }
    os << "iterations: " << sol.iterations << "\n";
    os << "max_quotient: " << sol.max_quotient << "\n";
    os << (cfg.objective == "ssp" ? "value_initial: " : "gain_initial: ")
       << value_str(sol.value[init_index], cfg.arith) << "\n";
    return os.str();
}

std::string run_solve(const RunConfig& cfg, MssModel& model) {
    return cfg.engine == "explicit" ? solve_explicit_report(cfg, model)
                                    : solve_symblicit_report(cfg, model);
}

/// Runs the job in a forked child so a wall-clock timeout can kill it; the
/// report travels back through a pipe. nullopt = timed out.
std::optional<std::string> with_timeout(double seconds, const std::function<std::string()>& job) {
    if (seconds <= 0) return job();
    int fd[2];
    if (pipe(fd) != 0) throw std::runtime_error("pipe failed");
    pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
        close(fd[0]);
        int code = 0;
        std::string out;
        try {
            out = job();
        } catch (const std::exception& e) {
            out = std::string("error: ") + e.what() + "\n";
            code = 1;
        }
        size_t off = 0;
        while (off < out.size()) {
            ssize_t w = write(fd[1], out.data() + off, out.size() - off);
            if (w <= 0) break;
            off += size_t(w);
        }
        close(fd[1]);
        _exit(code);
    }
    close(fd[1]);
    auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
    while (true) {
        int status = 0;
        pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) {
            std::string out;
            char buf[4096];
            ssize_t n;
            while ((n = read(fd[0], buf, sizeof buf)) > 0) out.append(buf, size_t(n));
            close(fd[0]);
            if (WIFEXITED(status) && WEXITSTATUS(status) != 0) throw std::runtime_error(out);
            return out;
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, nullptr, 0);
            close(fd[0]);
            return std::nullopt;
        }
        usleep(2000);
    }
}

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(cfg.out);
        f << text;
    }
}

int cmd_solve(RunConfig cfg) {
    auto model = load_model(cfg);
    auto report = with_timeout(cfg.timeout, [&] {
        auto m = load_model(cfg);
        return run_solve(cfg, m);
    });
    if (!report) {
        std::cerr << "TO: timed out after " << cfg.timeout << " s\n";
        return 2;
    }
    emit(cfg, *report);
    return 0;
}

std::string grab(const std::string& report, const std::string& key) {
    auto pos = report.find(key + ": ");
    if (pos == std::string::npos) return "";
    pos += key.size() + 2;
    return report.substr(pos, report.find('\n', pos) - pos);
}

int cmd_compare(RunConfig cfg) {
    std::ostringstream os;
    cfg.engine = "symblicit";
    auto m1 = load_model(cfg);
    auto sym = run_solve(cfg, m1);
    RunConfig ecfg = cfg;
    ecfg.engine = "explicit";
    auto m2 = load_model(ecfg);
    if (m2.dom.state_count() > (uint64_t(1) << 20)) {
        os << "explicit engine skipped: " << m2.dom.state_count() << " states exceed the cap\n";
        os << sym;
        emit(cfg, os.str());
        return 0;
    }
    auto exp = run_solve(ecfg, m2);
    std::string vkey = cfg.objective == "ssp" ? "value_initial" : "gain_initial";
    os << "objective: " << cfg.objective << "\n";
    os << "symblicit " << vkey << ": " << grab(sym, vkey) << "\n";
    os << "explicit  " << vkey << ": " << grab(exp, vkey) << "\n";
    os << "symblicit iterations: " << grab(sym, "iterations") << "\n";
    os << "explicit  iterations: " << grab(exp, "iterations") << "\n";
    os << "symblicit max_quotient: " << grab(sym, "max_quotient") << "\n";
    os << "explicit  max_quotient: " << grab(exp, "max_quotient") << "\n";
    bool match = grab(sym, vkey) == grab(exp, vkey);
    os << "match: " << (match ? "yes" : "NO") << "\n";
    emit(cfg, os.str());
    return match ? 0 : 1;
}

std::vector<int> parse_range(const std::string& spec) {
    std::vector<int> out;
    int lo = 0, hi = 0;
    if (sscanf(spec.c_str(), "%d-%d", &lo, &hi) == 2) {
        for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
        out.push_back(std::stoi(spec));
    }
    return out;
}

int cmd_bench(RunConfig cfg) {
    // Grid spec: name:A[-B],C[-D] expands both parameter ranges.
    auto colon = cfg.gen.find(':');
    auto comma = cfg.gen.find(',', colon);
    if (colon == std::string::npos || comma == std::string::npos)
        throw std::invalid_argument("bench needs --gen name:LO[-HI],LO[-HI]");
    std::string name = cfg.gen.substr(0, colon);
    auto as = parse_range(cfg.gen.substr(colon + 1, comma - colon - 1));
    auto bs = parse_range(cfg.gen.substr(comma + 1));
    std::ostringstream os;
    os << "gen\tstates\t#it\t|S_~L|\tlump\tsyst\timpr\ttotal\tvalue\n";
    for (int a : as) {
        for (int b : bs) {
            RunConfig cell = cfg;
            cell.gen = name + ":" + std::to_string(a) + "," + std::to_string(b);
            cell.engine = "symblicit";
            os << cell.gen << "\t";
            try {
                auto t0 = std::chrono::steady_clock::now();
                auto report = with_timeout(cfg.timeout, [&] {
                    auto m = load_model(cell);
                    return run_solve(cell, m);
                });
                if (!report) {
                    os << "TO\tTO\tTO\tTO\tTO\tTO\tTO\tTO\n";
                    continue;
                }
                double total =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
                std::string vkey = cfg.objective == "ssp" ? "value_initial" : "gain_initial";
                os << grab(*report, "states") << "\t" << grab(*report, "iterations") << "\t"
                   << grab(*report, "max_quotient") << "\t" << grab(*report, "lump_ms") << "\t"
                   << grab(*report, "syst_ms") << "\t" << grab(*report, "impr_ms") << "\t" << total
                   << "\t" << grab(*report, vkey) << "\n";
            } catch (const std::exception& e) {
                os << "error: " << e.what() << "\n";
            }
        }
    }
    emit(cfg, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symblicit solver for monotonic stochastic planning models"};
    app.require_subcommand(1);
    RunConfig cfg;
    if (const char* env = std::getenv("PAMDP_TIMEOUT")) cfg.timeout = std::atof(env);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--objective", cfg.objective, "ssp or emp")
            ->check(CLI::IsMember({"ssp", "emp"}));
        sub->add_option("--engine", cfg.engine, "symblicit or explicit")
            ->check(CLI::IsMember({"symblicit", "explicit"}));
        sub->add_option("--gen", cfg.gen, "generator spec name:params (monkey, moats)");
        sub->add_option("--input", cfg.input, "model file");
        sub->add_option("--arith", cfg.arith, "exact or float (report rendering only)")
            ->check(CLI::IsMember({"exact", "float"}));
        sub->add_option("--timeout", cfg.timeout, "wall-clock limit in seconds");
        sub->add_option("--seed", cfg.seed, "seed recorded in the report");
        sub->add_option("--out", cfg.out, "write the report to a file");
    };
    auto* solve = app.add_subcommand("solve", "solve one model");
    auto* compare = app.add_subcommand("compare", "run both engines and diff");
    auto* bench = app.add_subcommand("bench", "run a generator grid");
    add_common(solve);
    add_common(compare);
    add_common(bench);

    CLI11_PARSE(app, argc, argv);
    try {
        if (solve->parsed()) return cmd_solve(cfg);
        if (compare->parsed()) return cmd_compare(cfg);
        return cmd_bench(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
