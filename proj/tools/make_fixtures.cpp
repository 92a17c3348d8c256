// Writes the bundled fixture repositories and their run configuration.

#include "corpus.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Generate the bundled fixture repositories"};
    std::string dest;
    bool force = false;
    app.add_option("dest", dest, "Target directory (must not exist unless --force)")->required();
    app.add_flag("--force", force, "Remove the target directory first");
    CLI11_PARSE(app, argc, argv);

    try {
        if (std::filesystem::exists(dest)) {
            if (!force) {
                std::cerr << "error: " << dest << " exists; pass --force to replace it\n";
                return 2;
            }
            std::filesystem::remove_all(dest);
        }
        pcc::fixtures::build_fixture_corpus(dest);
        std::cout << "fixture corpus written to " << dest << " (config: " << dest << "/config.json)\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
