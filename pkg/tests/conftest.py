# keeps the tests directory on sys.path so suites can import support.py
