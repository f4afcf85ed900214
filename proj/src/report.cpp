#include "cwd/errors.hpp"
