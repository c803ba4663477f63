#include "sgcal/external_simulator.hpp"

#include "sgcal/csv.hpp"
#include "sgcal/errors.hpp"

#include <csignal>
#include <cstdio>
#include <mutex>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

namespace sgcal {

struct ExternalSimulator::State {
    std::string command;
    std::size_t p = 0;
    std::size_t q = 0;
    pid_t pid = -1;
    FILE* to_child = nullptr;
    FILE* from_child = nullptr;
    std::mutex mutex;
};

ExternalSimulator::ExternalSimulator(const std::string& command, std::size_t p, std::size_t q)
    : state_(std::make_unique<State>()) {
    state_->command = command;
    state_->p = p;
    state_->q = q;
    if (command.empty()) throw DomainError("external simulator: empty command");
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) throw DomainError("external simulator: pipe failed");
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw DomainError("external simulator: pipe failed");
    }
    // A child that dies early must not kill us with SIGPIPE on the next write.
    std::signal(SIGPIPE, SIG_IGN);
    const pid_t pid = fork();
    if (pid < 0) throw DomainError("external simulator: fork failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    state_->pid = pid;
    state_->to_child = fdopen(in_pipe[1], "w");
    state_->from_child = fdopen(out_pipe[0], "r");
    if (!state_->to_child || !state_->from_child) throw DomainError("external simulator: fdopen failed");
    std::fprintf(state_->to_child, "%zu %zu\n", p, q);
    std::fflush(state_->to_child);
}

ExternalSimulator::~ExternalSimulator() {
    if (!state_) return;
    if (state_->to_child) std::fclose(state_->to_child);
    if (state_->from_child) std::fclose(state_->from_child);
    if (state_->pid > 0) {
        int status = 0;
        waitpid(state_->pid, &status, 0);
    }
}

double ExternalSimulator::operator()(std::span<const double> x, std::span<const double> theta) {
    if (x.size() != state_->p || theta.size() != state_->q) {
        throw DomainError("external simulator: expected " + std::to_string(state_->p) + " inputs and " +
                          std::to_string(state_->q) + " parameters");
    }
    const std::lock_guard<std::mutex> lock(state_->mutex);
    std::string line;
    for (double v : x) line += format_double(v) + ' ';
    for (double v : theta) line += format_double(v) + ' ';
    line.back() = '\n';
    if (std::fputs(line.c_str(), state_->to_child) < 0 || std::fflush(state_->to_child) != 0) {
        throw ParseError("external simulator '" + state_->command + "' stopped accepting input", 0);
    }
    std::string reply;
    int c;
    while ((c = std::fgetc(state_->from_child)) != EOF && c != '\n') reply.push_back(static_cast<char>(c));
    if (reply.empty() && c == EOF) {
        throw ParseError("external simulator '" + state_->command + "' closed its output", 0);
    }
    try {
        return parse_double(reply);
    } catch (const ParseError&) {
        throw ParseError("external simulator '" + state_->command + "' returned '" + reply + "', not a number", 0);
    }
}

Simulator make_external_simulator(const std::string& command, std::size_t p, std::size_t q) {
    auto sim = std::make_shared<ExternalSimulator>(command, p, q);
    return [sim](std::span<const double> x, std::span<const double> theta) { return (*sim)(x, theta); };
}

}  // namespace sgcal
