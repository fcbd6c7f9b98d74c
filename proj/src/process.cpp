#include "process.hpp"

#include "scram/error.hpp"

#include <atomic>
#include <cerrno>
#include <fstream>
#include <sstream>
#include <sys/file.h>
#include <cstring>
#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

extern char** environ;

namespace scram::detail {

std::string sh_quote(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out += "'";
    return out;
}

FileLock::FileLock(const std::filesystem::path& file)
{
    fd_ = ::open(file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0)
        throw Error("cannot open lock file " + file.string() + ": " + std::strerror(errno));
    while (flock(fd_, LOCK_EX) != 0) {
        if (errno != EINTR) {
            ::close(fd_);
            throw Error("cannot lock " + file.string() + ": " + std::strerror(errno));
        }
    }
}

FileLock::~FileLock()
{
    if (fd_ >= 0) {
        flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

void write_file_atomic(const std::filesystem::path& file, std::string_view bytes)
{
    static std::atomic<unsigned> counter{0};
    auto tmp = file;
    tmp += ".tmp." + std::to_string(getpid()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw Error("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, file, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot write " + file.string());
    }
}

std::string read_file(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw Error("cannot read " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::map<std::string, std::string> current_environment()
{
    std::map<std::string, std::string> env;
    for (char** e = environ; e && *e; ++e) {
        std::string entry(*e);
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            continue;
        env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
    }
    return env;
}

ShellRun run_shell(const std::string& command, const std::filesystem::path& cwd,
                   const std::map<std::string, std::string>* env, bool capture)
{
    int pipefd[2] = {-1, -1};
    if (capture && pipe(pipefd) != 0)
        throw Error(std::string("pipe: ") + std::strerror(errno));

    std::vector<std::string> env_strings;
    std::vector<char*> envp;
    if (env) {
        for (const auto& [k, v] : *env)
            env_strings.push_back(k + "=" + v);
        for (auto& s : env_strings)
            envp.push_back(s.data());
        envp.push_back(nullptr);
    }
    const std::string cwd_str = cwd.string();

    const pid_t pid = fork();
    if (pid < 0)
        throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        if (capture) {
            dup2(pipefd[1], STDOUT_FILENO);
            close(pipefd[0]);
            close(pipefd[1]);
        }
        if (!cwd_str.empty() && chdir(cwd_str.c_str()) != 0)
            _exit(127);
        const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
        if (env)
            execve("/bin/sh", const_cast<char* const*>(argv), envp.data());
        else
            execv("/bin/sh", const_cast<char* const*>(argv));
        _exit(127);
    }

    ShellRun run;
    if (capture) {
        close(pipefd[1]);
        char buf[4096];
        for (;;) {
            const auto n = read(pipefd[0], buf, sizeof buf);
            if (n > 0) {
                run.output.append(buf, static_cast<std::size_t>(n));
                continue;
            }
            if (n < 0 && errno == EINTR)
                continue;
            break;
        }
        close(pipefd[0]);
    }
    int status = 0;
    while (waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR)
            throw Error(std::string("waitpid: ") + std::strerror(errno));
    }
    if (WIFEXITED(status))
        run.status = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        run.status = 128 + WTERMSIG(status);
    return run;
}

} // namespace scram::detail
