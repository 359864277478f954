#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <giw/giw.hpp>

namespace {

// Exit codes: 0 success, 1 input error, 2 internal-consistency failure,
// 3 cap exceeded with no result.
constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kConsistencyError = 2;
constexpr int kCapExceeded = 3;

int write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return kOk;
    }
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot open output file: " << out_path << "\n";
        return kInputError;
    }
    out << text;
    return kOk;
}

std::string components_message(const giw::Graph& g) {
    std::string msg = "graph is disconnected; components:";
    for (const auto& comp : giw::components(g)) {
        msg += " {";
        for (std::size_t i = 0; i < comp.size(); ++i) {
            if (i)
                msg += ",";
            msg += g.vertex_label(comp[i]);
        }
        msg += "}";
    }
    return msg;
}

std::string factor_list(const giw::AbelianGroupStructure& g) {
    std::string s = "[";
    for (std::size_t i = 0; i < g.torsion.size(); ++i) {
        if (i)
            s += ", ";
        s += g.torsion[i].str();
    }
    return s + "]";
}

int run_jacobian(const std::string& path, const std::string& format,
                 bool dump_matrices, const std::string& out_path) {
    giw::GraphFile file = giw::load_graph_file(path);
    const giw::Graph& g = *file.graph;
    if (!giw::is_connected(g)) {
        std::cerr << "error: " << components_message(g) << "\n";
        return kInputError;
    }
    giw::JacobianReport report = giw::jacobian_report(g);

    std::string text;
    if (format == "json") {
        giw::json doc = giw::jacobian_report_to_json(report);
        if (dump_matrices) {
            doc["matrices"] =
                giw::json{{"boundary", giw::matrix_to_json(giw::boundary_matrix(g))},
                          {"star", giw::matrix_to_json(giw::star_matrix(g))},
                          {"laplacian", giw::matrix_to_json(giw::laplacian_matrix(g))},
                          {"reduced_laplacian",
                           giw::matrix_to_json(giw::reduced_laplacian(g))}};
        }
        text = doc.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "order " << report.order.str() << ", factors "
           << factor_list(report.vertex) << "\n";
        os << "vertex/edge agreement: " << (report.agree ? "yes" : "NO") << "\n";
        if (dump_matrices) {
            os << "boundary: " << giw::matrix_to_json(giw::boundary_matrix(g)).dump()
               << "\n";
            os << "star: " << giw::matrix_to_json(giw::star_matrix(g)).dump() << "\n";
            os << "laplacian: " << giw::matrix_to_json(giw::laplacian_matrix(g)).dump()
               << "\n";
        }
        text = os.str();
    }
    if (int rc = write_output(text, out_path))
        return rc;
    if (!report.agree) {
        std::cerr << "error: vertex and edge Jacobians disagree: "
                  << report.vertex.to_string() << " vs " << report.edge.to_string()
                  << "\n";
        return kConsistencyError;
    }
    return kOk;
}

int run_trees(const std::string& path, bool list_trees, std::size_t max_enum_edges,
              const std::string& out_path) {
    giw::GraphFile file = giw::load_graph_file(path);
    const giw::Graph& g = *file.graph;
    std::vector<std::vector<std::size_t>> listing;
    giw::Int count;
    try {
        count = giw::enumerate_spanning_trees(g, max_enum_edges,
                                              list_trees ? &listing : nullptr);
    } catch (const giw::TooLargeError& e) {
        std::cerr << "error: " << e.what() << "\n"
                  << "matrix-tree count (no enumeration): kappa = "
                  << giw::tree_count(g).str() << "\n";
        return kCapExceeded;
    }
    std::ostringstream os;
    os << "kappa = " << count.str() << "\n";
    for (const auto& tree : listing) {
        os << " ";
        for (std::size_t e : tree)
            os << " " << g.edge_label(e);
        os << "\n";
    }
    return write_output(os.str(), out_path);
}

int run_derive(const std::string& path, std::size_t modulus,
               const std::string& out_path) {
    giw::GraphFile file = giw::load_graph_file(path);
    giw::VoltageAssignment va(file.graph, file.voltage_list());
    giw::DerivedGraph dg = giw::derive(va, modulus);
    const std::size_t comps = giw::component_count(*dg.graph);
    std::cerr << "fiber size " << modulus << ", "
              << (comps == 1 ? std::string("connected")
                             : "disconnected (" + std::to_string(comps) +
                                   " components)")
              << "\n";
    return write_output(giw::write_graph_json(*dg.graph), out_path);
}

int run_tower_cmd(const std::string& path, const std::string& p_text,
                  std::size_t levels, bool with_fit, bool oracle, std::size_t jobs,
                  const std::string& format, std::size_t matrix_cap,
                  bool debug_asserts, const std::string& out_path) {
    giw::GraphFile file = giw::load_graph_file(path);
    if (file.graph->vertex_count() == 0) {
        std::cerr << "error: graph has no vertices\n";
        return kInputError;
    }
    giw::Int p;
    try {
        p = giw::Int(p_text);
    } catch (const std::exception&) {
        std::cerr << "error: --p: not an integer: " << p_text << "\n";
        return kInputError;
    }
    if (!giw::is_small_prime(p)) {
        std::cerr << "error: --p must be a prime, got " << p.str() << "\n";
        return kInputError;
    }

    giw::TowerSpec spec;
    spec.base = file.graph;
    spec.voltages = file.voltage_list();
    spec.p = p;
    spec.levels = levels;
    spec.matrix_cap = matrix_cap;
    spec.debug_asserts = debug_asserts;

    std::unique_ptr<giw::TowerCache> cache;
    if (const char* dir = std::getenv("GRAPH_IWASAWA_CACHE"); dir && *dir)
        cache = std::make_unique<giw::TowerCache>(dir);

    giw::TowerResult result = giw::run_tower(spec, with_fit, jobs, cache.get(), oracle);

    std::string text;
    if (format == "json")
        text = giw::tower_result_to_json(spec, result).dump(2) + "\n";
    else if (format == "csv")
        text = giw::tower_result_to_csv(result);
    else
        text = giw::tower_result_to_table(spec, result);
    if (int rc = write_output(text, out_path))
        return rc;

    if (!result.all_agree) {
        std::cerr << "error: vertex-route and module-route results disagree\n";
        return kConsistencyError;
    }
    bool any_computed = false;
    for (const auto& row : result.levels)
        any_computed = any_computed || row.computed;
    if (!any_computed) {
        std::cerr << "error: no level fits under --max-matrix-dim " << matrix_cap
                  << "\n";
        return kCapExceeded;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact graph Jacobians, voltage covers, and Z_p-tower invariants"};
    app.require_subcommand(1);

    std::string path, out_path, format = "table", p_text = "2";
    bool dump_matrices = false, list_trees = false, with_fit = false, oracle = false;
    bool debug_asserts = false;
    std::size_t max_enum_edges = 24, modulus = 1, levels = 1, jobs = 1;
    std::size_t matrix_cap = 4096;

    auto* jac = app.add_subcommand("jacobian", "Jacobian of a connected graph");
    jac->add_option("path", path, "graph JSON file")->required();
    jac->add_option("--format", format, "table or json")
        ->check(CLI::IsMember({"table", "json"}));
    jac->add_flag("--dump-matrices", dump_matrices, "include boundary/star/Laplacian");
    jac->add_option("--out", out_path, "write the report here instead of stdout");

    auto* trees = app.add_subcommand("trees", "count spanning trees by enumeration");
    trees->add_option("path", path, "graph JSON file")->required();
    trees->add_flag("--list", list_trees, "print each tree's edge set");
    trees->add_option("--max-enum-edges", max_enum_edges,
                      "refuse enumeration above this many edges");
    trees->add_option("--out", out_path, "write the listing here instead of stdout");

    auto* der = app.add_subcommand("derive", "derived graph of a voltage assignment");
    der->add_option("path", path, "graph JSON file with voltages")->required();
    der->add_option("--modulus", modulus, "fiber group Z/m")
        ->required()
        ->check(CLI::PositiveNumber);
    der->add_option("--out", out_path, "write the derived graph here");

    auto* tow = app.add_subcommand("tower", "p-power tower reports and invariants");
    tow->add_option("path", path, "graph JSON file with voltages")->required();
    tow->add_option("--p", p_text, "the prime p (default 2)");
    tow->add_option("--levels", levels, "top level N; levels 0..N run")
        ->required()
        ->check(CLI::PositiveNumber);
    tow->add_flag("--fit", with_fit, "fit e_n = lambda*p^n + mu*n + nu");
    tow->add_flag("--oracle", oracle, "fail fast on any route disagreement");
    tow->add_option("--jobs", jobs, "levels computed in parallel")
        ->check(CLI::PositiveNumber);
    tow->add_option("--format", format, "table, json, or csv")
        ->check(CLI::IsMember({"table", "json", "csv"}));
    tow->add_option("--max-matrix-dim", matrix_cap,
                    "skip levels whose flattened matrices exceed this");
    tow->add_flag("--debug-asserts", debug_asserts,
                  "cross-check twisted matrices against the derived graph");
    tow->add_option("--out", out_path, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kInputError;
    }

    try {
        if (jac->parsed())
            return run_jacobian(path, format, dump_matrices, out_path);
        if (trees->parsed())
            return run_trees(path, list_trees, max_enum_edges, out_path);
        if (der->parsed())
            return run_derive(path, modulus, out_path);
        return run_tower_cmd(path, p_text, levels, with_fit, oracle, jobs, format,
                             matrix_cap, debug_asserts, out_path);
    } catch (const giw::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const giw::DisconnectedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const giw::NotConnectedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const giw::NotACoverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const giw::TooLargeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCapExceeded;
    } catch (const giw::CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCapExceeded;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConsistencyError;
    }
}
