#include "causalwr/errors.hpp"
