#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sechlab/cli.hpp"

int main(int argc, char** argv) {
    using namespace sechlab;
    std::vector<std::string> args(argv + 1, argv + argc);
    CliResult cli = parse_cli(args, std::cerr);
    if (!cli.proceed) return cli.exit_code;

    try {
        const ExperimentReport rep = run_experiment(cli.config);
        const std::string payload = serialize_report(rep);
        if (cli.config.out.empty()) {
            std::cout << payload;
        } else {
            std::ofstream out(cli.config.out, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write " << cli.config.out << "\n";
                return 1;
            }
            out << payload;
        }
        std::cerr << experiment_name(cli.config.experiment)
                  << (rep.predicate_pass ? ": pass" : ": FAIL") << " (";
        bool first = true;
        for (const auto& [k, v] : rep.aggregates) {
            if (!first) std::cerr << ", ";
            std::cerr << k << "=" << v;
            first = false;
        }
        std::cerr << ") in " << rep.wall_ms << " ms\n";
        return rep.predicate_pass ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
