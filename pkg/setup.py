import os
import re
import setuptools

NAME             = "NetFlowRL"
AUTHOR           = "Dhyey Mavani"
AUTHOR_EMAIL     = "ddmavani2003@gmail.com"
DESCRIPTION      = "Bi-level graph reinforcement learning for network flow control: a GNN policy proposes desired states, linear control problems turn them into feasible flows."
LICENSE          = "Apache"
KEYWORDS         = "NetFlowRL network-flow reinforcement-learning linear-programming graph-neural-networks"
URL              = "https://github.com/LogFlow-AI/" + NAME
README           = "README.md"
CLASSIFIERS      = [
  "Programming Language :: Python",
  "Programming Language :: Python :: 3",
  "Topic :: Scientific/Engineering :: Mathematics",
]
INSTALL_REQUIRES = [
  "numpy",
  "pandas",
  "pytest",
  "coverage",
  "scipy",
  "networkx",
]
ENTRY_POINTS = {
  "console_scripts": [
    "netflowrl=NetFlowRL.harness.cli:main",
  ],
}
SCRIPTS = [

]

HERE = os.path.dirname(__file__)

def read(file):
  with open(os.path.join(HERE, file), "r") as fh:
    return fh.read()

VERSION = re.search(
  r'__version__ = [\'"]([^\'"]*)[\'"]',
  read(NAME.replace("-", "_") + "/__init__.py")
).group(1)

LONG_DESCRIPTION = read(README)

if __name__ == "__main__":
  setuptools.setup(
    name=NAME,
    version=VERSION,
    packages=setuptools.find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    author=AUTHOR,
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    license=LICENSE,
    keywords=KEYWORDS,
    url=URL,
    classifiers=CLASSIFIERS,
    install_requires=INSTALL_REQUIRES,
    entry_points=ENTRY_POINTS,
    scripts=SCRIPTS,
    include_package_data=True
  )
