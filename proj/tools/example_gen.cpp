// Writes the bundled reference problems as YAML problem files.

#include "CLI11.hpp"
#include "rslq/instances.hpp"
#include "rslq/problem_io.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Write bundled example problems"};
    std::string out = "problems";
    std::vector<std::string> names;
    bool list = false;
    app.add_option("--out", out, "Output directory")->capture_default_str();
    app.add_flag("--list", list, "List the available problems");
    app.add_option("names", names, "Problems to write (default: all)");
    CLI11_PARSE(app, argc, argv);

    namespace inst = rslq::instances;
    if (list) {
        for (const auto& e : inst::catalog()) std::cout << e.name << "  " << e.summary << '\n';
        return 0;
    }
    try {
        std::filesystem::create_directories(out);
        if (names.empty()) {
            for (const auto& e : inst::catalog()) names.push_back(e.name);
        }
        for (const auto& name : names) {
            const auto path = std::filesystem::path(out) / (name + ".yaml");
            rslq::save_problem(path, inst::find(name).file());
            std::cout << path.string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
