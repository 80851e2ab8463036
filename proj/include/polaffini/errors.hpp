#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace polaffini {

// Base error. Pipeline drivers attach the stage name so a failure deep in
// the estimation reports where it happened.
class error : public std::runtime_error {
public:
    explicit error(std::string msg)
        : std::runtime_error(msg), msg_(std::move(msg)) {}

    void set_stage(const std::string& stage) {
        if (!stage_.empty())
            return;
        stage_ = stage;
        full_ = "[" + stage_ + "] " + msg_;
    }

    const std::string& stage() const { return stage_; }

    const char* what() const noexcept override {
        return full_.empty() ? msg_.c_str() : full_.c_str();
    }

private:
    std::string msg_;
    std::string stage_;
    std::string full_;
};

// Bad or inconsistent input data; the CLI maps these to exit code 3.
class data_error : public error {
    using error::error;
};

// Numerical failure (singular system, undefined logarithm, degenerate
// geometry); the CLI maps these to exit code 4.
class numeric_error : public error {
    using error::error;
};

class pairing_mismatch : public data_error { public: using data_error::data_error; };
class insufficient_points : public data_error { public: using data_error::data_error; };
class empty_point_set : public data_error { public: using data_error::data_error; };
class malformed_header : public data_error { public: using data_error::data_error; };
class unsupported_datatype : public data_error { public: using data_error::data_error; };
class dimensionality_unsupported : public data_error { public: using data_error::data_error; };
class grid_mismatch : public data_error { public: using data_error::data_error; };
class grid_too_small : public data_error { public: using data_error::data_error; };
class interpolation_mismatch : public data_error { public: using data_error::data_error; };
class no_transforms : public data_error { public: using data_error::data_error; };

class degenerate_configuration : public numeric_error { public: using numeric_error::numeric_error; };
class degenerate_input : public numeric_error { public: using numeric_error::numeric_error; };
class log_undefined : public numeric_error { public: using numeric_error::numeric_error; };
class singular_transform : public numeric_error { public: using numeric_error::numeric_error; };

}  // namespace polaffini
