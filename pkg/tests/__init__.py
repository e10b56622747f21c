# Tests package for fredholm-backstepping
