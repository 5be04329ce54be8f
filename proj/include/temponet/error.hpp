#ifndef TEMPONET_ERROR_HPP
#define TEMPONET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace temponet {

// Thrown when an input violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
  public:
    explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when a numerical routine produces non-finite values or otherwise breaks down.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Wraps an error raised inside a named pipeline stage.
class StageError : public std::runtime_error {
  public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

} // namespace temponet

#endif // TEMPONET_ERROR_HPP
