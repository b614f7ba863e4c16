# emotrust tests
